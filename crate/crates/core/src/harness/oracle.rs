use std::collections::HashMap;
use std::fmt::Write;

use crate::env::{Environment, StateKey};
use crate::error::{Error, Result};

pub const DEFAULT_ORACLE_STATES: usize = 1_000_000;

/// Exact values of every action at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Optimal discounted value of the successor under each action.
    pub action_values: Vec<f64>,
    /// Actions whose value equals the best one.
    pub optimal_actions: Vec<usize>,
    /// Value of the state itself: its reward plus `gamma` times the best
    /// action value.
    pub state_value: f64,
}

impl OracleResult {
    pub fn best_action_value(&self) -> f64 {
        self.action_values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_optimal(&self, action: usize) -> bool {
        self.optimal_actions.contains(&action)
    }

    /// Two-column `action,value` table.
    pub fn to_table(&self) -> String {
        let mut out = String::from("action,value\n");
        for (a, v) in self.action_values.iter().enumerate() {
            let _ = writeln!(out, "{a},{v:.9}");
        }
        out
    }
}

struct Enumerator<'e, E: Environment> {
    env: &'e E,
    gamma: f64,
    depth_bound: usize,
    max_states: usize,
    memo: HashMap<StateKey, f64>,
}

impl<E: Environment> Enumerator<'_, E> {
    fn value(&mut self, state: &E::State, depth: usize) -> Result<f64> {
        let reward = self.env.reward(state);
        if self.env.is_terminal(state) || self.env.num_actions(state) == 0 {
            return Ok(reward);
        }
        let key = self.env.encode(state);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        if depth >= self.depth_bound {
            return Err(Error::BudgetExceeded(format!(
                "non-terminal state {} at depth bound {}",
                self.env.describe(state),
                self.depth_bound
            )));
        }
        if self.memo.len() >= self.max_states {
            return Err(Error::BudgetExceeded(format!(
                "more than {} non-terminal states",
                self.max_states
            )));
        }
        let mut best = f64::NEG_INFINITY;
        for a in 0..self.env.num_actions(state) {
            let next = self.env.transition(state, a)?;
            best = best.max(self.value(&next, depth + 1)?);
        }
        let v = reward + self.gamma * best;
        self.memo.insert(key, v);
        Ok(v)
    }
}

/// Exhaustive max-backup evaluation of every action at `state`.
///
/// Terminal states are worth their reward; any other state is worth its
/// reward plus `gamma` times its best successor. Values are memoized by state
/// key. Reaching a non-terminal state at `depth_bound`, or more than
/// [`DEFAULT_ORACLE_STATES`] non-terminal states, fails with `BudgetExceeded`.
pub fn brute_force_values<E: Environment>(
    env: &E,
    state: &E::State,
    gamma: f64,
    depth_bound: usize,
) -> Result<OracleResult> {
    brute_force_values_within(env, state, gamma, depth_bound, DEFAULT_ORACLE_STATES)
}

/// [`brute_force_values`] with an explicit cap on explored states.
pub fn brute_force_values_within<E: Environment>(
    env: &E,
    state: &E::State,
    gamma: f64,
    depth_bound: usize,
    max_states: usize,
) -> Result<OracleResult> {
    if env.is_terminal(state) || env.num_actions(state) == 0 {
        return Err(Error::PreconditionViolation(format!(
            "oracle state {} is terminal",
            env.describe(state)
        )));
    }
    let mut e = Enumerator {
        env,
        gamma,
        depth_bound,
        max_states,
        memo: HashMap::new(),
    };
    let action_values = (0..env.num_actions(state))
        .map(|a| {
            let next = env.transition(state, a)?;
            e.value(&next, 1)
        })
        .collect::<Result<Vec<f64>>>()?;
    let best = action_values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * best.abs().max(1.0);
    let optimal_actions = action_values
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v >= best - tol)
        .map(|(a, _)| a)
        .collect();
    Ok(OracleResult {
        action_values,
        optimal_actions,
        state_value: env.reward(state) + gamma * best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Chain, FrozenLake, SyntheticTree};
    use crate::grammar::GrammarEnv;

    #[test]
    fn chain_of_two() {
        let env = Chain::with_actions(vec![1, 0]);
        let r = brute_force_values(&env, &env.initial(), 1.0, 10).unwrap();
        assert_eq!(r.state_value, 1.0);
        assert_eq!(r.action_values, vec![0.0, 1.0]);
        assert_eq!(r.optimal_actions, vec![1]);
    }

    #[test]
    fn synthetic_root_value_is_discounted_best_leaf() {
        let gamma = 0.9;
        for seed in 0..5 {
            let env = SyntheticTree::new(2, 3, seed).unwrap();
            let leaves = env.leaf_rewards();
            assert_eq!(leaves.len(), 8);
            let best = leaves.iter().copied().fold(f64::MIN, f64::max);
            let r = brute_force_values(&env, &env.initial(), gamma, 10).unwrap();
            assert!((r.state_value - gamma.powi(3) * best).abs() < 1e-15);
            // Action a covers leaves 4a..4a+3.
            for a in 0..2 {
                let sub = leaves[4 * a..4 * a + 4].iter().copied().fold(f64::MIN, f64::max);
                assert!((r.action_values[a] - gamma.powi(2) * sub).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn frozen_lake_start_value() {
        let env = FrozenLake::standard();
        let r = brute_force_values(&env, &env.initial(), 0.99, 500).unwrap();
        // 14 moves to the goal: the first successor is 13 moves away.
        assert!((r.best_action_value() - 0.99f64.powi(13)).abs() < 1e-12);
        assert!((r.state_value - 0.99f64.powi(14)).abs() < 1e-12);
        // Moving left or up from the corner wastes a step; down and right are optimal.
        assert_eq!(r.optimal_actions, vec![1, 2]);
    }

    #[test]
    fn budget_is_enforced() {
        let env = GrammarEnv::sqrt_benchmark();
        assert!(matches!(
            brute_force_values_within(&env, &env.initial(), 1.0, 100, 10_000),
            Err(Error::BudgetExceeded(_))
        ));
        let env = Chain::with_fixed_action(10, 0);
        assert!(matches!(
            brute_force_values(&env, &env.initial(), 1.0, 3),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn table_format() {
        let env = Chain::with_actions(vec![0]);
        let r = brute_force_values(&env, &env.initial(), 1.0, 10).unwrap();
        assert_eq!(r.to_table(), "action,value\n0,1.000000000\n1,0.000000000\n");
    }
}
