//! Monte-Carlo tree search with amplified exploration for deterministic
//! single-player MDPs.
//!
//! * [`env`]: the environment contract and the Chain, ChainLoop, FrozenLake and
//!   synthetic tree environments.
//! * [`grammar`]: equation discovery over a context-free grammar.
//! * [`search`]: the search engine with its classical, AmEx and AmEx-Max variants.
//! * [`harness`]: episodes, sweeps, CSV output, coverage snapshots and an
//!   exhaustive oracle.
//! * [`cli`]: the `amex` command line.
//!
//! ```
//! use amex_mcts::env::{Chain, Environment};
//! use amex_mcts::search::{run_search, SearchConfig, Variant};
//!
//! let env = Chain::with_fixed_action(3, 1);
//! let (policy, _) = run_search(&env, env.initial(), &SearchConfig::new(Variant::AmEx, 20))?;
//! assert_eq!(policy.chosen_action, 1);
//! # Ok::<(), amex_mcts::Error>(())
//! ```

pub mod cli;
pub mod env;
pub mod error;
pub mod grammar;
pub mod harness;
pub mod search;

pub use error::{Error, Result};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/environments.md")]
    mod environments {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/grammar.md")]
    mod grammar {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
