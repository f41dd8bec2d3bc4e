//! Monte-Carlo tree search with amplified exploration.
//!
//! Three variants share one engine:
//!
//! * [`Variant::Classical`]: plain UCT search with random rollouts.
//! * [`Variant::AmEx`]: selection skips subtrees that are already completely
//!   explored, while visit counts keep following what plain UCT would have
//!   done. Terminal leaves are evaluated once, known states are closed through
//!   the transposition table, and the search returns early once the whole tree
//!   below the root is closed.
//! * [`Variant::AmExMax`]: AmEx with the running maximum instead of the mean
//!   as the exploitation term of UCT.
//!
//! Each node tracks two visit counts. `n_c` is incremented along the path
//! plain UCT would have taken (the `a_max` child at every level) and is what
//! UCT and the output policy read. `n_p` is incremented along the path that
//! was actually selected (the `a_select` child). Rewards are accumulated along
//! the selected path; whenever `n_c` of an `a_max` child is bumped without it
//! being selected, its reward sum is rescaled so its mean does not move.

mod dot;
mod engine;
mod tree;
mod uct;

use std::fmt;
use std::str::FromStr;

pub use dot::to_dot;
pub use engine::{Evaluation, EvaluationKind, IterationOutcome, PathStep, Search, SelectionOutcome};
pub use tree::{NodeId, NodeStatus, SearchNode, SearchTree, TranspositionTable};
pub use uct::{node_q, uct_score};

use crate::env::Environment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Classical,
    AmEx,
    AmExMax,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Classical, Variant::AmEx, Variant::AmExMax];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Classical => "classical",
            Variant::AmEx => "amex",
            Variant::AmExMax => "amex-max",
        }
    }

    /// Whether closed subtrees are skipped during selection.
    pub fn skips_closed(self) -> bool {
        self != Variant::Classical
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "classical" | "mcts" => Ok(Variant::Classical),
            "amex" => Ok(Variant::AmEx),
            "amex-max" | "amexmax" => Ok(Variant::AmExMax),
            other => Err(Error::Config(format!(
                "unknown variant `{other}` (expected classical, amex or amex-max)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub variant: Variant,
    /// UCT exploration constant.
    pub c: f64,
    /// Discount factor in `(0, 1]`.
    pub gamma: f64,
    /// Iteration budget.
    pub n_sims: usize,
    /// Maximum number of random steps in a rollout; rollouts that hit the cap
    /// without reaching a terminal contribute nothing beyond it.
    pub rollout_cap: usize,
    pub seed: u64,
}

pub const DEFAULT_ROLLOUT_CAP: usize = 1_000;

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            variant: Variant::AmEx,
            c: std::f64::consts::SQRT_2,
            gamma: 1.0,
            n_sims: 100,
            rollout_cap: DEFAULT_ROLLOUT_CAP,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn new(variant: Variant, n_sims: usize) -> Self {
        SearchConfig {
            variant,
            n_sims,
            ..Default::default()
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_rollout_cap(mut self, cap: usize) -> Self {
        self.rollout_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!(
                "gamma must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if self.n_sims == 0 {
            return Err(Error::Config("n_sims must be at least 1".into()));
        }
        if self.rollout_cap == 0 {
            return Err(Error::Config("rollout cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Distribution over root actions plus the action to play.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub action_weights: Vec<f64>,
    pub chosen_action: usize,
    /// True when the policy came from a completely explored tree and is
    /// one-hot on the best root value.
    pub from_complete_tree: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchStats {
    pub iterations: usize,
    /// Distinct state keys among the tree nodes.
    pub unique_states: usize,
    pub tree_size: usize,
    /// Nodes closed because their whole subtree was explored.
    pub closed_subtrees: usize,
    pub closed_nodes: usize,
    pub root_complete: bool,
    /// Best reward of a terminal node in the tree.
    pub best_tree_reward: Option<f64>,
    /// Best reward of any terminal state evaluated, rollouts included.
    pub best_reward: Option<f64>,
}

/// Runs a full search from `state` and returns the root policy.
pub fn run_search<E: Environment>(
    env: &E,
    state: E::State,
    config: &SearchConfig,
) -> Result<(Policy, SearchStats)> {
    let mut search = Search::new(env, state, config.clone())?;
    search.run()?;
    let policy = search.policy();
    Ok((policy, search.stats()))
}
