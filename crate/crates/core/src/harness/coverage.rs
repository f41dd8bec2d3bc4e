use std::fmt::Write;

use crate::env::Environment;
use crate::error::Result;
use crate::search::{to_dot, Search, SearchConfig, SearchStats};

/// Runs one search from the initial state and returns its statistics with a
/// DOT snapshot of the final tree.
pub fn coverage_report<E: Environment>(env: &E, config: &SearchConfig) -> Result<(SearchStats, String)> {
    config.validate()?;
    let mut search = Search::new(env, env.initial(), config.clone())?;
    search.run()?;
    let dot = to_dot(search.tree(), env, config.variant);
    Ok((search.stats(), dot))
}

fn reward_field(r: Option<f64>) -> String {
    r.map_or_else(|| "none".to_string(), |v| format!("{v:.6}"))
}

/// `key: value` lines for terminal output.
pub fn render_stats(stats: &SearchStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "iterations: {}", stats.iterations);
    let _ = writeln!(out, "unique_states: {}", stats.unique_states);
    let _ = writeln!(out, "tree_size: {}", stats.tree_size);
    let _ = writeln!(out, "closed_subtrees: {}", stats.closed_subtrees);
    let _ = writeln!(out, "closed_nodes: {}", stats.closed_nodes);
    let _ = writeln!(out, "root_complete: {}", stats.root_complete);
    let _ = writeln!(out, "best_tree_reward: {}", reward_field(stats.best_tree_reward));
    let _ = writeln!(out, "best_reward: {}", reward_field(stats.best_reward));
    out
}
