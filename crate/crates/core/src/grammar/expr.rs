use std::str::FromStr;

use thiserror::Error;

use crate::error::Error;

/// Terminal symbol of an arithmetic expression in prefix notation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Token {
    Add,
    Sub,
    Mul,
    /// `^ a b` is `b` raised to the power `a`.
    Pow,
    Sin,
    Cos,
    Log,
    Var(usize),
    Const(f64),
}

impl Token {
    pub fn arity(self) -> usize {
        match self {
            Token::Add | Token::Sub | Token::Mul | Token::Pow => 2,
            Token::Sin | Token::Cos | Token::Log => 1,
            Token::Var(_) | Token::Const(_) => 0,
        }
    }
}

impl FromStr for Token {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "+" => Token::Add,
            "-" => Token::Sub,
            "*" | "·" => Token::Mul,
            "^" => Token::Pow,
            "sin" => Token::Sin,
            "cos" => Token::Cos,
            "log" => Token::Log,
            _ => {
                if let Some(idx) = s.strip_prefix('x').and_then(|i| i.parse().ok()) {
                    Token::Var(idx)
                } else if let Ok(c) = s.parse::<f64>() {
                    Token::Const(c)
                } else {
                    return Err(Error::Parse(format!("`{s}` is not an expression token")));
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    /// A sub-expression produced a non-finite value (log of a non-positive
    /// number, fractional power of a negative number, overflow).
    #[error("expression left its domain")]
    Domain,
    #[error("malformed prefix expression")]
    Malformed,
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain)
    }
}

fn eval_at(tokens: &[Token], pos: &mut usize, row: &[f64]) -> Result<f64, EvalError> {
    let token = *tokens.get(*pos).ok_or(EvalError::Malformed)?;
    *pos += 1;
    let value = match token {
        Token::Const(c) => c,
        Token::Var(i) => *row.get(i).ok_or(EvalError::Malformed)?,
        Token::Sin => eval_at(tokens, pos, row)?.sin(),
        Token::Cos => eval_at(tokens, pos, row)?.cos(),
        Token::Log => eval_at(tokens, pos, row)?.ln(),
        Token::Add | Token::Sub | Token::Mul | Token::Pow => {
            let a = eval_at(tokens, pos, row)?;
            let b = eval_at(tokens, pos, row)?;
            match token {
                Token::Add => a + b,
                Token::Sub => a - b,
                Token::Mul => a * b,
                _ => b.powf(a),
            }
        }
    };
    finite(value)
}

/// Evaluates a complete prefix expression on one data row (`x0 = row[0]`, ...).
pub fn evaluate_expression(tokens: &[Token], row: &[f64]) -> Result<f64, EvalError> {
    let mut pos = 0;
    let value = eval_at(tokens, &mut pos, row)?;
    if pos != tokens.len() {
        return Err(EvalError::Malformed);
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Token> {
        s.split_whitespace().map(|t| t.parse().unwrap()).collect()
    }

    #[test]
    fn power_takes_exponent_first() {
        assert_eq!(evaluate_expression(&toks("^ 2 x0"), &[3.0]), Ok(9.0));
        assert_eq!(evaluate_expression(&toks("^ 0.5 x0"), &[4.0]), Ok(2.0));
        assert_eq!(evaluate_expression(&toks("^ x1 x0"), &[2.0, 3.0]), Ok(8.0));
    }

    #[test]
    fn domain_errors() {
        assert_eq!(
            evaluate_expression(&toks("log x0"), &[0.0]),
            Err(EvalError::Domain)
        );
        assert_eq!(
            evaluate_expression(&toks("^ 0.5 x0"), &[-1.0]),
            Err(EvalError::Domain)
        );
    }

    #[test]
    fn nested_operators() {
        let v = evaluate_expression(&toks("- * 2 x0 sin x1"), &[1.5, 0.5]).unwrap();
        assert_eq!(v, 2.0 * 1.5 - 0.5f64.sin());
        let v = evaluate_expression(&toks("+ cos x0 log x1"), &[0.0, 1.0]).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn malformed_expressions() {
        assert_eq!(
            evaluate_expression(&toks("+ x0"), &[1.0]),
            Err(EvalError::Malformed)
        );
        assert_eq!(
            evaluate_expression(&toks("x0 x0"), &[1.0]),
            Err(EvalError::Malformed)
        );
        assert_eq!(
            evaluate_expression(&toks("x3"), &[1.0]),
            Err(EvalError::Malformed)
        );
        assert!("foo".parse::<Token>().is_err());
    }
}
