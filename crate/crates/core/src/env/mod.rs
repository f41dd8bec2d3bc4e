//! Deterministic single-player MDPs.
//!
//! Every environment exposes the same contract: an ordered action list
//! (actions are the indices `0..num_actions(s)`), a pure transition function,
//! a state reward, a terminal predicate and a canonical byte encoding used as
//! the transposition key.
//!
//! Rewards are attached to states: stepping into `s'` yields `reward(s')`.
//! Non-terminal states must never have a negative reward; the search checks
//! this online and [`validate_rewards`] checks it exhaustively.

mod chain;
mod lake;
mod synthetic;

use std::collections::{HashSet, VecDeque};
use std::fmt;

pub use chain::{Chain, ChainLoop, ChainLoopState, ChainState};
pub use lake::{FrozenLake, LakeAction, LakeMap, LakeState, DEFAULT_LAKE_HORIZON, STANDARD_MAP_8X8};
pub use synthetic::{SyntheticTree, SyntheticState};

use crate::error::{Error, Result};

/// Canonical, injective encoding of an environment state.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Box<[u8]>);

impl StateKey {
    pub fn new(bytes: impl Into<Box<[u8]>>) -> Self {
        StateKey(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateKey(")?;
        for b in self.0.iter() {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

/// Result of a single environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<S> {
    pub state: S,
    pub reward: f64,
    pub terminal: bool,
}

pub trait Environment {
    type State: Clone;

    fn name(&self) -> &str;

    fn initial(&self) -> Self::State;

    /// Number of actions available in `state`. Terminal states have none.
    fn num_actions(&self, state: &Self::State) -> usize;

    /// Deterministic successor of `state` under `action`.
    fn transition(&self, state: &Self::State, action: usize) -> Result<Self::State>;

    fn reward(&self, state: &Self::State) -> f64;

    fn is_terminal(&self, state: &Self::State) -> bool;

    fn encode(&self, state: &Self::State) -> StateKey;

    /// Human-readable rendering used in DOT labels and error messages.
    fn describe(&self, state: &Self::State) -> String {
        format!("{:?}", self.encode(state))
    }

    /// Applies `action`, returning the successor with its reward and terminal flag.
    fn step(&self, state: &Self::State, action: usize) -> Result<Step<Self::State>> {
        if self.is_terminal(state) {
            return Err(Error::PreconditionViolation(format!(
                "cannot step terminal state {}",
                self.describe(state)
            )));
        }
        let next = self.transition(state, action)?;
        Ok(Step {
            reward: self.reward(&next),
            terminal: self.is_terminal(&next),
            state: next,
        })
    }
}

pub(crate) fn check_action<E: Environment + ?Sized>(
    env: &E,
    state: &E::State,
    action: usize,
) -> Result<()> {
    if env.is_terminal(state) {
        return Err(Error::PreconditionViolation(format!(
            "cannot step terminal state {}",
            env.describe(state)
        )));
    }
    let available = env.num_actions(state);
    if action >= available {
        return Err(Error::InvalidAction {
            state: env.describe(state),
            action,
            available,
        });
    }
    Ok(())
}

/// Outcome of [`validate_rewards`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewardCheck {
    pub states_checked: usize,
    /// False when the reachable state space was larger than the bound and
    /// only a breadth-first prefix of it was checked.
    pub exhaustive: bool,
}

/// Breadth-first enumeration of the states reachable from `env.initial()`,
/// failing on the first non-terminal state with a negative reward.
pub fn validate_rewards<E: Environment>(env: &E, exhaustive_bound: usize) -> Result<RewardCheck> {
    let start = env.initial();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(env.encode(&start));
    queue.push_back(start);
    let mut checked = 0;
    while let Some(state) = queue.pop_front() {
        if checked == exhaustive_bound {
            return Ok(RewardCheck {
                states_checked: checked,
                exhaustive: false,
            });
        }
        checked += 1;
        if env.is_terminal(&state) {
            continue;
        }
        let reward = env.reward(&state);
        if reward < 0.0 {
            return Err(Error::RewardSignViolation {
                state: env.describe(&state),
                reward,
            });
        }
        for a in 0..env.num_actions(&state) {
            let next = env.transition(&state, a)?;
            if seen.insert(env.encode(&next)) {
                queue.push_back(next);
            }
        }
    }
    Ok(RewardCheck {
        states_checked: checked,
        exhaustive: true,
    })
}

/// Enumerates every reachable state (by key). Used by tests and the oracle.
pub fn reachable_states<E: Environment>(env: &E, bound: usize) -> Result<Vec<E::State>> {
    let start = env.initial();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    seen.insert(env.encode(&start));
    queue.push_back(start);
    while let Some(state) = queue.pop_front() {
        if out.len() == bound {
            return Err(Error::BudgetExceeded(format!(
                "more than {bound} reachable states in {}",
                env.name()
            )));
        }
        if !env.is_terminal(&state) {
            for a in 0..env.num_actions(&state) {
                let next = env.transition(&state, a)?;
                if seen.insert(env.encode(&next)) {
                    queue.push_back(next);
                }
            }
        }
        out.push(state);
    }
    Ok(out)
}
