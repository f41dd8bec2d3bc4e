use super::expr::{evaluate_expression, Token};
use super::{Dataset, DerivationState, Grammar, Symbol};
use crate::env::{check_action, Environment, StateKey};
use crate::error::{Error, Result};

/// Derivations longer than this are cut off with reward -1.
pub const DEFAULT_MAX_EXPANSIONS: usize = 25;

/// Grammar-guided equation discovery over a fixed dataset.
#[derive(Debug, Clone)]
pub struct GrammarEnv {
    grammar: Grammar,
    dataset: Dataset,
    max_expansions: usize,
    tokens: Vec<Token>,
}

impl GrammarEnv {
    pub fn new(grammar: Grammar, dataset: Dataset, max_expansions: usize) -> Result<Self> {
        if max_expansions == 0 {
            return Err(Error::Config("max_expansions must be at least 1".into()));
        }
        let tokens = grammar
            .terminals()
            .iter()
            .map(|t| t.parse())
            .collect::<Result<Vec<Token>>>()?;
        Ok(GrammarEnv {
            grammar,
            dataset,
            max_expansions,
            tokens,
        })
    }

    /// Benchmark grammar on the `y = sqrt(x0)` dataset.
    pub fn sqrt_benchmark() -> Self {
        Self::new(
            Grammar::benchmark(),
            Dataset::sqrt_benchmark(),
            DEFAULT_MAX_EXPANSIONS,
        )
        .expect("benchmark environment is valid")
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn max_expansions(&self) -> usize {
        self.max_expansions
    }

    /// Expression tokens of a complete state, `None` if it still has nonterminals.
    pub fn tokens(&self, state: &DerivationState) -> Option<Vec<Token>> {
        state
            .symbols
            .iter()
            .map(|s| match s {
                Symbol::Terminal(t) => Some(self.tokens[*t as usize]),
                Symbol::Nonterminal(_) => None,
            })
            .collect()
    }
}

/// Reward of a finished derivation: `1 - MSE` clamped to `[-1, 1]` for a
/// complete expression that evaluates finitely on every row, `-1` otherwise.
pub fn grammar_reward(tokens: Option<&[Token]>, dataset: &Dataset) -> f64 {
    let Some(tokens) = tokens else {
        return -1.0;
    };
    let mut sse = 0.0;
    for (row, y) in dataset.rows().iter().zip(dataset.targets()) {
        match evaluate_expression(tokens, row) {
            Ok(v) => sse += (v - y).powi(2),
            Err(_) => return -1.0,
        }
    }
    let reward = 1.0 - sse / dataset.len() as f64;
    if reward.is_nan() {
        -1.0
    } else {
        reward.clamp(-1.0, 1.0)
    }
}

impl Environment for GrammarEnv {
    type State = DerivationState;

    fn name(&self) -> &str {
        "grammar"
    }

    fn initial(&self) -> DerivationState {
        self.grammar.initial_state()
    }

    fn num_actions(&self, state: &DerivationState) -> usize {
        if self.is_terminal(state) {
            0
        } else {
            self.grammar
                .applicable_rules(state)
                .map_or(0, <[usize]>::len)
        }
    }

    fn transition(&self, state: &DerivationState, action: usize) -> Result<DerivationState> {
        check_action(self, state, action)?;
        let rule = self.grammar.applicable_rules(state)?[action];
        self.grammar.apply_rule(state, rule)
    }

    fn reward(&self, state: &DerivationState) -> f64 {
        if !self.is_terminal(state) {
            return 0.0;
        }
        grammar_reward(self.tokens(state).as_deref(), &self.dataset)
    }

    fn is_terminal(&self, state: &DerivationState) -> bool {
        state.is_complete() || state.expansions_used >= self.max_expansions
    }

    fn encode(&self, state: &DerivationState) -> StateKey {
        let mut bytes = Vec::with_capacity(2 * state.symbols.len() + 6);
        bytes.extend_from_slice(&(state.expansions_used as u32).to_le_bytes());
        for s in &state.symbols {
            let (tag, idx) = match s {
                Symbol::Nonterminal(i) => (b'N', *i),
                Symbol::Terminal(i) => (b'T', *i),
            };
            bytes.push(b' ');
            bytes.push(tag);
            bytes.extend_from_slice(&idx.to_le_bytes());
        }
        StateKey::new(bytes)
    }

    fn describe(&self, state: &DerivationState) -> String {
        self.grammar.render(&state.symbols)
    }
}
