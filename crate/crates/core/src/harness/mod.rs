//! Experiment plumbing: search-per-move episodes, seed sweeps, coverage
//! snapshots, the exhaustive oracle and CSV output.

mod coverage;
mod oracle;
mod record;

use std::collections::HashSet;
use std::fmt::{self, Write};
use std::time::Instant;

use rayon::prelude::*;

pub use coverage::{coverage_report, render_stats};
pub use oracle::{brute_force_values, brute_force_values_within, OracleResult, DEFAULT_ORACLE_STATES};
pub use record::{write_csv, write_records, CSV_HEADER};

use crate::env::{Environment, StateKey};
use crate::error::Result;
use crate::search::{Search, SearchConfig, Variant};

/// One episode of one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub env: String,
    pub variant: Variant,
    pub n_sims: usize,
    pub seed: u64,
    /// Undiscounted sum of rewards collected along the episode.
    pub episode_return: f64,
    pub steps_taken: usize,
    /// Distinct states over all per-move search trees.
    pub unique_states: usize,
    pub wall_ms: f64,
}

/// Mixes seed components into one 64-bit seed (splitmix64 finalizer).
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x9E37_79B9_7F4A_7C15, |acc, &p| {
        let mut z = (acc ^ p).wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    })
}

/// Seed used to build the environment instance of episode `seed`.
pub fn env_seed(global_seed: u64, seed: u64) -> u64 {
    derive_seed(&[global_seed, seed, u64::MAX])
}

fn move_seed(global_seed: u64, seed: u64, step: usize) -> u64 {
    derive_seed(&[global_seed, seed, step as u64])
}

/// Plays one episode from the initial state, running a fresh search at every
/// move and taking the policy's chosen action.
///
/// `config.seed` is the global seed; the search at move `t` of episode `seed`
/// is seeded from both plus `t`.
pub fn run_episode<E: Environment>(env: &E, config: &SearchConfig, seed: u64) -> Result<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    let mut state = env.initial();
    let mut episode_return = 0.0;
    let mut steps_taken = 0;
    let mut seen: HashSet<StateKey> = HashSet::new();
    while !env.is_terminal(&state) {
        let move_config = config.clone().with_seed(move_seed(config.seed, seed, steps_taken));
        let mut search = Search::new(env, state.clone(), move_config)?;
        search.run()?;
        let action = search.policy().chosen_action;
        seen.extend(search.state_keys().cloned());
        let step = env.step(&state, action)?;
        episode_return += step.reward;
        steps_taken += 1;
        state = step.state;
    }
    Ok(RunRecord {
        env: env.name().to_string(),
        variant: config.variant,
        n_sims: config.n_sims,
        seed,
        episode_return,
        steps_taken,
        unique_states: seen.len(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Return statistics of one (variant, n_sims) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub variant: Variant,
    pub n_sims: usize,
    pub episodes: usize,
    pub mean_return: f64,
    /// Sample standard deviation; 0 for a single episode.
    pub std_return: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    /// Ordered by variant, then n_sims, then seed, as given to [`sweep`].
    pub records: Vec<RunRecord>,
    pub summary: Vec<CellSummary>,
}

impl SweepResult {
    pub fn cell(&self, variant: Variant, n_sims: usize) -> Option<&CellSummary> {
        self.summary
            .iter()
            .find(|c| c.variant == variant && c.n_sims == n_sims)
    }

    pub fn records_for(&self, variant: Variant, n_sims: usize) -> impl Iterator<Item = &RunRecord> {
        self.records
            .iter()
            .filter(move |r| r.variant == variant && r.n_sims == n_sims)
    }
}

impl fmt::Display for SweepResult {
    /// `variant,n_sims,episodes,mean_return,std_return` table.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::from("variant,n_sims,episodes,mean_return,std_return\n");
        for c in &self.summary {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6}",
                c.variant, c.n_sims, c.episodes, c.mean_return, c.std_return
            );
        }
        f.write_str(&out)
    }
}

fn summarize(variant: Variant, n_sims: usize, returns: &[f64]) -> CellSummary {
    let n = returns.len();
    let mean = if n == 0 { 0.0 } else { returns.iter().sum::<f64>() / n as f64 };
    let std = if n < 2 {
        0.0
    } else {
        (returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    CellSummary {
        variant,
        n_sims,
        episodes: n,
        mean_return: mean,
        std_return: std,
    }
}

/// Runs every (variant, n_sims, seed) combination with seeds `0..n_seeds`.
///
/// `make_env` builds the environment of one episode from [`env_seed`], so
/// randomized environments differ per seed but not per variant or budget.
/// Cells run in parallel; the result does not depend on scheduling.
pub fn sweep<E, F>(
    make_env: F,
    variants: &[Variant],
    n_sims: &[usize],
    n_seeds: u64,
    base: &SearchConfig,
) -> Result<SweepResult>
where
    E: Environment,
    F: Fn(u64) -> Result<E> + Sync,
{
    let cells: Vec<(Variant, usize, u64)> = variants
        .iter()
        .flat_map(|&v| n_sims.iter().flat_map(move |&n| (0..n_seeds).map(move |s| (v, n, s))))
        .collect();
    let records = cells
        .par_iter()
        .map(|&(variant, n, seed)| {
            let env = make_env(env_seed(base.seed, seed))?;
            let config = SearchConfig {
                variant,
                n_sims: n,
                ..base.clone()
            };
            run_episode(&env, &config, seed)
        })
        .collect::<Result<Vec<RunRecord>>>()?;
    let summary = variants
        .iter()
        .flat_map(|&v| n_sims.iter().map(move |&n| (v, n)))
        .map(|(v, n)| {
            let returns: Vec<f64> = records
                .iter()
                .filter(|r| r.variant == v && r.n_sims == n)
                .map(|r| r.episode_return)
                .collect();
            summarize(v, n, &returns)
        })
        .collect();
    Ok(SweepResult { records, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Chain, FrozenLake};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_chain(seed: u64) -> Result<Chain> {
        Ok(Chain::random(10, &mut ChaCha8Rng::seed_from_u64(seed)))
    }

    #[test]
    fn chain_amex_solves_every_seed() {
        for seed in 0..5 {
            let env = random_chain(env_seed(0, seed)).unwrap();
            let rec = run_episode(&env, &SearchConfig::new(Variant::AmEx, 64), seed).unwrap();
            assert_eq!(rec.episode_return, 1.0);
            assert_eq!(rec.steps_taken, 10);
            assert_eq!(rec.env, "chain");
        }
    }

    #[test]
    fn lake_episode_stays_within_horizon() {
        let env = FrozenLake::standard();
        let config = SearchConfig::new(Variant::Classical, 4).with_gamma(0.99);
        let rec = run_episode(&env, &config, 3).unwrap();
        assert!(rec.steps_taken <= 400);
        assert!(rec.episode_return == 0.0 || rec.episode_return == 1.0);
        assert!(rec.unique_states >= 1);
    }

    #[test]
    fn sweep_shape_and_order() {
        let base = SearchConfig::default();
        let out = sweep(random_chain, &[Variant::AmEx, Variant::Classical], &[2, 4, 8], 3, &base).unwrap();
        assert_eq!(out.records.len(), 18);
        assert_eq!(out.summary.len(), 6);
        let keys: Vec<(Variant, usize, u64)> = out.records.iter().map(|r| (r.variant, r.n_sims, r.seed)).collect();
        assert_eq!(keys[0], (Variant::AmEx, 2, 0));
        assert_eq!(keys[4], (Variant::AmEx, 4, 1));
        assert_eq!(keys[17], (Variant::Classical, 8, 2));
        let empty = sweep(random_chain, &[Variant::AmEx], &[], 25, &base).unwrap();
        assert!(empty.records.is_empty() && empty.summary.is_empty());
    }

    #[test]
    fn summary_statistics() {
        let c = summarize(Variant::AmEx, 1, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(c.mean_return, 0.5);
        assert!((c.std_return - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(summarize(Variant::AmEx, 1, &[0.7]).std_return, 0.0);
    }

    #[test]
    fn seeds_are_mixed() {
        assert_ne!(derive_seed(&[0, 1]), derive_seed(&[1, 0]));
        assert_ne!(env_seed(0, 0), env_seed(1, 0));
        assert_eq!(derive_seed(&[5, 6]), derive_seed(&[5, 6]));
    }
}
