//! Equation discovery as an MDP over leftmost derivations of a context-free
//! grammar.
//!
//! A state is a sentential form in prefix notation. Its actions are the rules
//! whose head is the leftmost nonterminal; applying one substitutes that
//! nonterminal in place. Complete forms are scored by `1 - MSE` against a
//! dataset.

mod dataset;
mod env;
mod expr;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use dataset::Dataset;
pub use env::{grammar_reward, GrammarEnv, DEFAULT_MAX_EXPANSIONS};
pub use expr::{evaluate_expression, EvalError, Token};

use crate::error::{Error, Result};

/// Grammar used for the square-root discovery benchmark, one rule per line.
pub const BENCHMARK_GRAMMAR: &str = "\
Start -> 2
Start -> 1
Start -> 0.5
Start -> + Start Start
Start -> - Start Start
Start -> * Start Start
Start -> sin InnerFunction
Start -> cos InnerFunction
Start -> log InnerFunction
Start -> Variable
Start -> ^ Exponent Variable
Exponent -> 6
Exponent -> 5
Exponent -> 4
Exponent -> 3
Exponent -> 2
Exponent -> 0.5
Exponent -> x1
InnerFunction -> ^ Exponent Variable
InnerFunction -> x0
InnerFunction -> x1
InnerFunction -> + Sum Sum
Sum -> ^ Exponent Variable
Sum -> 1
Sum -> x0
Sum -> x1
Variable -> x0
Variable -> x1
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Nonterminal(u16),
    Terminal(u16),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: u16,
    pub body: Vec<Symbol>,
}

/// A context-free grammar `(N, T, R, S)`; the start symbol is the head of the
/// first rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    nonterminals: Vec<String>,
    terminals: Vec<String>,
    rules: Vec<Rule>,
    by_head: Vec<Vec<usize>>,
    start: u16,
}

impl Grammar {
    pub fn benchmark() -> Self {
        BENCHMARK_GRAMMAR.parse().expect("benchmark grammar is valid")
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn start(&self) -> Symbol {
        Symbol::Nonterminal(self.start)
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    pub fn name(&self, symbol: Symbol) -> &str {
        match symbol {
            Symbol::Nonterminal(i) => &self.nonterminals[i as usize],
            Symbol::Terminal(i) => &self.terminals[i as usize],
        }
    }

    /// Rule indices with the given head, in grammar order.
    pub fn rules_for(&self, head: u16) -> &[usize] {
        &self.by_head[head as usize]
    }

    pub fn render(&self, symbols: &[Symbol]) -> String {
        symbols
            .iter()
            .map(|&s| self.name(s))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Initial derivation state holding only the start symbol.
    pub fn initial_state(&self) -> DerivationState {
        DerivationState {
            symbols: vec![self.start()],
            expansions_used: 0,
        }
    }

    /// Rules applicable to the leftmost nonterminal of `state`.
    pub fn applicable_rules(&self, state: &DerivationState) -> Result<&[usize]> {
        match state.leftmost_nonterminal() {
            Some((_, head)) => Ok(self.rules_for(head)),
            None => Err(Error::PreconditionViolation(format!(
                "`{}` is already complete",
                self.render(&state.symbols)
            ))),
        }
    }

    /// Substitutes the leftmost nonterminal with the body of `rule`.
    pub fn apply_rule(&self, state: &DerivationState, rule: usize) -> Result<DerivationState> {
        let r = self.rules.get(rule).ok_or_else(|| {
            Error::Config(format!("rule index {rule} out of range ({} rules)", self.rules.len()))
        })?;
        let (pos, head) = state.leftmost_nonterminal().ok_or_else(|| {
            Error::PreconditionViolation(format!(
                "`{}` is already complete",
                self.render(&state.symbols)
            ))
        })?;
        if head != r.head {
            return Err(Error::RuleMismatch {
                rule,
                head: self.nonterminals[r.head as usize].clone(),
                found: self.nonterminals[head as usize].clone(),
            });
        }
        let mut symbols = Vec::with_capacity(state.symbols.len() + r.body.len() - 1);
        symbols.extend_from_slice(&state.symbols[..pos]);
        symbols.extend_from_slice(&r.body);
        symbols.extend_from_slice(&state.symbols[pos + 1..]);
        Ok(DerivationState {
            symbols,
            expansions_used: state.expansions_used + 1,
        })
    }

    /// Parses a space-separated sentential form.
    pub fn parse_symbols(&self, text: &str) -> Result<Vec<Symbol>> {
        text.split_whitespace()
            .map(|tok| {
                if let Some(i) = self.nonterminals.iter().position(|n| n == tok) {
                    Ok(Symbol::Nonterminal(i as u16))
                } else if let Some(i) = self.terminals.iter().position(|t| t == tok) {
                    Ok(Symbol::Terminal(i as u16))
                } else {
                    Err(Error::Parse(format!("`{tok}` is not a grammar symbol")))
                }
            })
            .collect()
    }
}

impl FromStr for Grammar {
    type Err = Error;

    /// One `HEAD -> sym sym ...` rule per line; blank lines and lines
    /// starting with `#` are ignored. Every head is a nonterminal, every other
    /// symbol a terminal.
    fn from_str(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, body) = line.split_once("->").ok_or_else(|| {
                Error::Parse(format!("line {}: expected `HEAD -> symbols`", lineno + 1))
            })?;
            let head = head.trim();
            if head.is_empty() || head.contains(char::is_whitespace) {
                return Err(Error::Parse(format!(
                    "line {}: rule head must be a single symbol",
                    lineno + 1
                )));
            }
            let body: Vec<&str> = body.split_whitespace().collect();
            if body.is_empty() {
                return Err(Error::Parse(format!("line {}: empty rule body", lineno + 1)));
            }
            raw.push((head, body));
        }
        if raw.is_empty() {
            return Err(Error::Parse("grammar has no rules".into()));
        }

        let mut nonterminals: Vec<String> = Vec::new();
        let mut nt_index = HashMap::new();
        for (head, _) in &raw {
            if !nt_index.contains_key(head) {
                nt_index.insert(*head, nonterminals.len() as u16);
                nonterminals.push(head.to_string());
            }
        }
        let mut terminals: Vec<String> = Vec::new();
        let mut t_index = HashMap::new();
        let mut rules = Vec::with_capacity(raw.len());
        let mut by_head = vec![Vec::new(); nonterminals.len()];
        for (head, body) in &raw {
            let body = body
                .iter()
                .map(|tok| match nt_index.get(tok) {
                    Some(&i) => Symbol::Nonterminal(i),
                    None => {
                        let i = *t_index.entry(*tok).or_insert_with(|| {
                            terminals.push(tok.to_string());
                            (terminals.len() - 1) as u16
                        });
                        Symbol::Terminal(i)
                    }
                })
                .collect();
            let head = nt_index[head];
            by_head[head as usize].push(rules.len());
            rules.push(Rule { head, body });
        }
        Ok(Grammar {
            nonterminals,
            terminals,
            rules,
            by_head,
            start: 0,
        })
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            writeln!(
                f,
                "{} -> {}",
                self.nonterminals[rule.head as usize],
                self.render(&rule.body)
            )?;
        }
        Ok(())
    }
}

/// A sentential form plus the number of rule applications that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DerivationState {
    pub symbols: Vec<Symbol>,
    pub expansions_used: usize,
}

impl DerivationState {
    pub fn leftmost_nonterminal(&self) -> Option<(usize, u16)> {
        self.symbols.iter().enumerate().find_map(|(i, s)| match s {
            Symbol::Nonterminal(n) => Some((i, *n)),
            Symbol::Terminal(_) => None,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.leftmost_nonterminal().is_none()
    }
}
