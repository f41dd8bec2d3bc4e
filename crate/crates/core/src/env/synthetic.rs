use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_action, Environment, StateKey};
use crate::error::{Error, Result};

const MAX_LEAVES: usize = 1 << 24;

/// A complete `b`-ary tree of depth `D` whose states are action paths.
///
/// Leaves carry rewards drawn uniformly from `[0, 1]` once per seed; interior
/// states carry `interior_reward` (0 unless overridden). There are no
/// transpositions, which makes it the reference fixture for comparing the
/// search against exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct SyntheticTree {
    branching: usize,
    depth: usize,
    leaf_rewards: Vec<f64>,
    interior_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SyntheticState {
    pub path: Vec<u8>,
}

impl SyntheticTree {
    pub fn new(branching: usize, depth: usize, seed: u64) -> Result<Self> {
        if !(1..=255).contains(&branching) || depth == 0 {
            return Err(Error::Config(format!(
                "synthetic tree needs 1 <= b <= 255 and D >= 1 (got b={branching}, D={depth})"
            )));
        }
        let leaves = (0..depth)
            .try_fold(1usize, |acc, _| acc.checked_mul(branching))
            .filter(|&n| n <= MAX_LEAVES)
            .ok_or_else(|| {
                Error::Config(format!(
                    "synthetic tree b={branching}, D={depth} has more than {MAX_LEAVES} leaves"
                ))
            })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let leaf_rewards = (0..leaves).map(|_| rng.gen::<f64>()).collect();
        Ok(SyntheticTree {
            branching,
            depth,
            leaf_rewards,
            interior_reward: 0.0,
        })
    }

    pub fn with_interior_reward(mut self, reward: f64) -> Self {
        self.interior_reward = reward;
        self
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaf_rewards(&self) -> &[f64] {
        &self.leaf_rewards
    }

    fn leaf_index(&self, path: &[u8]) -> usize {
        path.iter()
            .fold(0, |idx, &a| idx * self.branching + a as usize)
    }
}

impl Environment for SyntheticTree {
    type State = SyntheticState;

    fn name(&self) -> &str {
        "synthetic"
    }

    fn initial(&self) -> SyntheticState {
        SyntheticState { path: Vec::new() }
    }

    fn num_actions(&self, state: &SyntheticState) -> usize {
        if self.is_terminal(state) {
            0
        } else {
            self.branching
        }
    }

    fn transition(&self, state: &SyntheticState, action: usize) -> Result<SyntheticState> {
        check_action(self, state, action)?;
        let mut path = state.path.clone();
        path.push(action as u8);
        Ok(SyntheticState { path })
    }

    fn reward(&self, state: &SyntheticState) -> f64 {
        if self.is_terminal(state) {
            self.leaf_rewards[self.leaf_index(&state.path)]
        } else {
            self.interior_reward
        }
    }

    fn is_terminal(&self, state: &SyntheticState) -> bool {
        state.path.len() >= self.depth
    }

    fn encode(&self, state: &SyntheticState) -> StateKey {
        StateKey::new(state.path.clone())
    }

    fn describe(&self, state: &SyntheticState) -> String {
        if state.path.is_empty() {
            return "root".into();
        }
        state
            .path
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}
