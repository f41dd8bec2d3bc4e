use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by environments, the search and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation was called on an input it does not accept, e.g. stepping
    /// a terminal state or searching from a terminal root.
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    /// An internal bookkeeping invariant of the search tree was broken.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    /// A non-terminal state produced a negative reward.
    #[error("non-terminal state {state} has negative reward {reward}")]
    RewardSignViolation { state: String, reward: f64 },

    /// Action index outside `0..num_actions`.
    #[error("action {action} is invalid in state {state} ({available} actions available)")]
    InvalidAction {
        state: String,
        action: usize,
        available: usize,
    },

    /// A grammar rule was applied to a state whose leftmost nonterminal does
    /// not match the rule head.
    #[error("rule {rule} has head `{head}` but the leftmost nonterminal is `{found}`")]
    RuleMismatch {
        rule: usize,
        head: String,
        found: String,
    },

    #[error("brute-force oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
