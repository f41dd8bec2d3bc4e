use rand::Rng;

use super::{check_action, Environment, StateKey};
use crate::error::{Error, Result};

fn correct_actions(k: usize, rng: &mut impl Rng) -> Vec<u8> {
    (0..k).map(|_| rng.gen_range(0..2u8)).collect()
}

/// The agent must pick the correct one of two actions `k` times in a row.
/// A wrong action ends the episode with reward 0; the k-th correct action
/// ends it with reward 1.
#[derive(Debug, Clone)]
pub struct Chain {
    correct: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainState {
    pub position: usize,
    /// Set once a wrong action was taken at `position`.
    pub failed: bool,
}

impl Chain {
    /// Correct actions drawn per depth from `rng`.
    pub fn random(k: usize, rng: &mut impl Rng) -> Self {
        Self::with_actions(correct_actions(k, rng))
    }

    /// Same correct action at every depth.
    pub fn with_fixed_action(k: usize, action: u8) -> Self {
        Self::with_actions(vec![action; k])
    }

    pub fn with_actions(correct: Vec<u8>) -> Self {
        assert!(!correct.is_empty(), "chain length must be at least 1");
        assert!(correct.iter().all(|&a| a < 2), "chain actions are 0 or 1");
        Chain { correct }
    }

    pub fn k(&self) -> usize {
        self.correct.len()
    }

    pub fn correct_action(&self, position: usize) -> usize {
        self.correct[position] as usize
    }

    pub fn correct_actions(&self) -> &[u8] {
        &self.correct
    }
}

impl Environment for Chain {
    type State = ChainState;

    fn name(&self) -> &str {
        "chain"
    }

    fn initial(&self) -> ChainState {
        ChainState {
            position: 0,
            failed: false,
        }
    }

    fn num_actions(&self, state: &ChainState) -> usize {
        if self.is_terminal(state) {
            0
        } else {
            2
        }
    }

    fn transition(&self, state: &ChainState, action: usize) -> Result<ChainState> {
        check_action(self, state, action)?;
        Ok(if action == self.correct_action(state.position) {
            ChainState {
                position: state.position + 1,
                failed: false,
            }
        } else {
            ChainState {
                position: state.position,
                failed: true,
            }
        })
    }

    fn reward(&self, state: &ChainState) -> f64 {
        if !state.failed && state.position == self.k() {
            1.0
        } else {
            0.0
        }
    }

    fn is_terminal(&self, state: &ChainState) -> bool {
        state.failed || state.position == self.k()
    }

    fn encode(&self, state: &ChainState) -> StateKey {
        let mut bytes = (state.position as u32).to_le_bytes().to_vec();
        bytes.push(state.failed as u8);
        StateKey::new(bytes)
    }

    fn describe(&self, state: &ChainState) -> String {
        if state.failed {
            format!("p{}x", state.position)
        } else {
            format!("p{}", state.position)
        }
    }
}

/// Like [`Chain`], but a wrong action sends the agent back to position 0
/// instead of ending the episode. The episode ends after `horizon` steps.
#[derive(Debug, Clone)]
pub struct ChainLoop {
    correct: Vec<u8>,
    horizon: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainLoopState {
    pub position: usize,
    pub steps_remaining: usize,
}

impl ChainLoop {
    pub fn random(k: usize, horizon: usize, rng: &mut impl Rng) -> Self {
        Self::with_actions(correct_actions(k, rng), horizon)
    }

    pub fn with_fixed_action(k: usize, horizon: usize, action: u8) -> Self {
        Self::with_actions(vec![action; k], horizon)
    }

    pub fn with_actions(correct: Vec<u8>, horizon: usize) -> Self {
        assert!(!correct.is_empty(), "chain length must be at least 1");
        assert!(correct.iter().all(|&a| a < 2), "chain actions are 0 or 1");
        ChainLoop { correct, horizon }
    }

    pub fn k(&self) -> usize {
        self.correct.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn correct_action(&self, position: usize) -> usize {
        self.correct[position] as usize
    }
}

impl Environment for ChainLoop {
    type State = ChainLoopState;

    fn name(&self) -> &str {
        "chainloop"
    }

    fn initial(&self) -> ChainLoopState {
        ChainLoopState {
            position: 0,
            steps_remaining: self.horizon,
        }
    }

    fn num_actions(&self, state: &ChainLoopState) -> usize {
        if self.is_terminal(state) {
            0
        } else {
            2
        }
    }

    fn transition(&self, state: &ChainLoopState, action: usize) -> Result<ChainLoopState> {
        check_action(self, state, action)?;
        let steps_remaining = state.steps_remaining.checked_sub(1).ok_or_else(|| {
            Error::InvariantViolation("non-terminal chainloop state without steps".into())
        })?;
        let position = if action == self.correct_action(state.position) {
            state.position + 1
        } else {
            0
        };
        Ok(ChainLoopState {
            position,
            steps_remaining,
        })
    }

    fn reward(&self, state: &ChainLoopState) -> f64 {
        if state.position == self.k() {
            1.0
        } else {
            0.0
        }
    }

    fn is_terminal(&self, state: &ChainLoopState) -> bool {
        state.position == self.k() || state.steps_remaining == 0
    }

    fn encode(&self, state: &ChainLoopState) -> StateKey {
        let mut bytes = (state.position as u32).to_le_bytes().to_vec();
        bytes.extend_from_slice(&(state.steps_remaining as u32).to_le_bytes());
        StateKey::new(bytes)
    }

    fn describe(&self, state: &ChainLoopState) -> String {
        format!("p{}t{}", state.position, state.steps_remaining)
    }
}
