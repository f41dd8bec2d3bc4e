//! Command-line front end of the `amex` binary.
//!
//! [`parse_args`] turns an argument vector (optionally merged with a
//! `--config` file of `key = value` lines) into a [`CliConfig`];
//! [`dispatch`] runs it and returns the process exit code.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{Chain, ChainLoop, Environment, FrozenLake, LakeMap, SyntheticTree, DEFAULT_LAKE_HORIZON};
use crate::error::{Error, Result};
use crate::grammar::{Dataset, Grammar, GrammarEnv, DEFAULT_MAX_EXPANSIONS};
use crate::harness::{self, coverage_report, render_stats, sweep, RunRecord};
use crate::search::{SearchConfig, Variant, DEFAULT_ROLLOUT_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Comma-separated simulation budgets; an empty string is an empty list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budgets(pub Vec<usize>);

impl FromStr for Budgets {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| match t.parse::<usize>() {
                Ok(0) => Err("budgets must be at least 1".to_string()),
                Ok(n) => Ok(n),
                Err(_) => Err(format!("`{t}` is not a simulation count")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Budgets)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnvKind {
    Chain,
    Chainloop,
    Frozenlake,
    Grammar,
    Synthetic,
}

#[derive(Debug, Parser)]
#[command(
    name = "amex",
    version,
    about = "Monte-Carlo tree search with amplified exploration",
    long_about = "Monte-Carlo tree search with amplified exploration.\n\n\
                  Every flag can also be given in a --config file as `key = value` \
                  (flag name without dashes); flags on the command line win.\n\
                  AMEX_SEED sets the default global seed.",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// File of `key = value` defaults; explicit flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Play episodes with one variant and one budget; one CSV row per seed.
    Run(EpisodeArgs),
    /// Play every variant x budget x seed combination; one CSV row per episode.
    Sweep(EpisodeArgs),
    /// Run one search from the initial state and report tree coverage.
    Coverage(CoverageArgs),
    /// Print exact action values at the initial state.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct EnvArgs {
    /// Environment to use.
    #[arg(long, value_enum)]
    env: EnvKind,
    /// Chain length (chain, chainloop).
    #[arg(long)]
    k: Option<usize>,
    /// Episode step limit (chainloop: default k; frozenlake: default 400).
    #[arg(long)]
    horizon: Option<usize>,
    /// FrozenLake map file: 8 lines of S, F, H, G.
    #[arg(long, value_name = "FILE")]
    map: Option<PathBuf>,
    /// Grammar rule file, one `HEAD -> sym sym ...` per line (default: built-in grammar).
    #[arg(long, value_name = "FILE")]
    grammar: Option<PathBuf>,
    /// Dataset CSV with header x0,x1,...,y (default: y = sqrt(x0) on 20 points).
    #[arg(long, value_name = "FILE")]
    dataset: Option<PathBuf>,
    /// Maximum rule applications per derivation (grammar).
    #[arg(long, default_value_t = DEFAULT_MAX_EXPANSIONS)]
    max_expansions: usize,
    /// Branching factor (synthetic).
    #[arg(long, default_value_t = 2)]
    b: usize,
    /// Tree depth (synthetic).
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Fixed seed for the synthetic leaf rewards (default: derived per episode).
    #[arg(long)]
    tree_seed: Option<u64>,
    /// Reward of every interior synthetic state; negative values are rejected at search time.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    interior_reward: f64,
    /// Use this correct action (0 or 1) at every chain position instead of random ones.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    correct_action: Option<u8>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// UCT exploration constant.
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    c: f64,
    /// Discount factor (default 0.99 for frozenlake, 1 otherwise).
    #[arg(long)]
    gamma: Option<f64>,
    /// Maximum number of random steps per rollout.
    #[arg(long, default_value_t = DEFAULT_ROLLOUT_CAP)]
    rollout_cap: usize,
    /// Global seed.
    #[arg(long, env = "AMEX_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct EpisodeArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Search variants, comma separated: classical, amex, amex-max.
    #[arg(long, value_delimiter = ',', default_value = "amex")]
    variant: Vec<Variant>,
    /// Simulation budgets per move, comma separated.
    #[arg(long, default_value = "100")]
    n_sims: Budgets,
    /// Number of seeds (episodes per cell), numbered from 0.
    #[arg(long, default_value_t = 25)]
    seeds: u64,
    /// CSV output file (default: standard output).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write 0 instead of the measured wall time, for byte-identical reruns.
    #[arg(long)]
    no_wall_time: bool,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Search variant: classical, amex or amex-max.
    #[arg(long, default_value = "amex")]
    variant: Variant,
    /// Simulation budget.
    #[arg(long, default_value = "100")]
    n_sims: usize,
    /// DOT file for the final search tree.
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    env: EnvArgs,
    /// Discount factor (default 0.99 for frozenlake, 1 otherwise).
    #[arg(long)]
    gamma: Option<f64>,
    /// Give up on states deeper than this.
    #[arg(long, default_value_t = 1_000)]
    depth_bound: usize,
    /// Global seed (selects the random chain instance).
    #[arg(long, env = "AMEX_SEED", default_value_t = 0)]
    seed: u64,
    /// Table output file (default: standard output).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Environment selection with its parameters. Files are read at dispatch time.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    Chain {
        k: usize,
        correct_action: Option<u8>,
    },
    ChainLoop {
        k: usize,
        horizon: usize,
        correct_action: Option<u8>,
    },
    FrozenLake {
        map: Option<PathBuf>,
        horizon: usize,
    },
    Grammar {
        grammar: Option<PathBuf>,
        dataset: Option<PathBuf>,
        max_expansions: usize,
    },
    Synthetic {
        b: usize,
        depth: usize,
        tree_seed: Option<u64>,
        interior_reward: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Run,
    Sweep,
    Coverage,
    Oracle,
}

/// Validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub command: CommandKind,
    pub env: EnvSpec,
    pub variants: Vec<Variant>,
    pub n_sims: Vec<usize>,
    pub seeds: u64,
    /// Variant and budget are placeholders; `seed` is the global seed.
    pub search: SearchConfig,
    pub depth_bound: usize,
    pub out: Option<PathBuf>,
    pub dot: Option<PathBuf>,
    pub no_wall_time: bool,
}

impl CliConfig {
    /// Number of episodes a run or sweep will play.
    pub fn cell_count(&self) -> usize {
        self.variants.len() * self.n_sims.len() * self.seeds as usize
    }
}

fn usage(kind: ErrorKind, msg: impl std::fmt::Display) -> clap::Error {
    Cli::command().error(kind, msg)
}

fn env_spec(args: &EnvArgs) -> Result<EnvSpec, clap::Error> {
    let need_k = || {
        args.k.filter(|&k| k > 0).ok_or_else(|| {
            usage(
                ErrorKind::MissingRequiredArgument,
                "--k <K> (at least 1) is required for chain and chainloop",
            )
        })
    };
    Ok(match args.env {
        EnvKind::Chain => EnvSpec::Chain {
            k: need_k()?,
            correct_action: args.correct_action,
        },
        EnvKind::Chainloop => {
            let k = need_k()?;
            EnvSpec::ChainLoop {
                k,
                horizon: args.horizon.unwrap_or(k),
                correct_action: args.correct_action,
            }
        }
        EnvKind::Frozenlake => EnvSpec::FrozenLake {
            map: args.map.clone(),
            horizon: args.horizon.unwrap_or(DEFAULT_LAKE_HORIZON),
        },
        EnvKind::Grammar => EnvSpec::Grammar {
            grammar: args.grammar.clone(),
            dataset: args.dataset.clone(),
            max_expansions: args.max_expansions,
        },
        EnvKind::Synthetic => EnvSpec::Synthetic {
            b: args.b,
            depth: args.depth,
            tree_seed: args.tree_seed,
            interior_reward: args.interior_reward,
        },
    })
}

fn search_base(env: &EnvSpec, c: f64, gamma: Option<f64>, rollout_cap: usize, seed: u64) -> Result<SearchConfig, clap::Error> {
    let default_gamma = if matches!(env, EnvSpec::FrozenLake { .. }) { 0.99 } else { 1.0 };
    let config = SearchConfig::default()
        .with_c(c)
        .with_gamma(gamma.unwrap_or(default_gamma))
        .with_rollout_cap(rollout_cap)
        .with_seed(seed);
    config
        .validate()
        .map_err(|e| usage(ErrorKind::ValueValidation, e))?;
    Ok(config)
}

/// Splits `key = value` lines into flags. Blank lines and `#` comments are skipped;
/// `flag = true` becomes a bare switch and `flag = false` is dropped.
fn config_flags(path: &Path) -> Result<Vec<String>, clap::Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(ErrorKind::Io, format!("cannot read config {}: {e}", path.display())))?;
    let mut flags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            usage(
                ErrorKind::InvalidValue,
                format!("{}:{}: expected `key = value`", path.display(), i + 1),
            )
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key == "config" {
            continue;
        }
        match value {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => {
                flags.push(format!("--{key}"));
                flags.push(value.to_string());
            }
        }
    }
    Ok(flags)
}

/// Inserts the entries of `--config FILE` right after the subcommand so that
/// explicit flags, which come later, take precedence.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>, clap::Error> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut iter = argv.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            config = Some(iter.next().ok_or_else(|| {
                usage(ErrorKind::InvalidValue, "--config requires a file")
            })?);
        } else if let Some(path) = arg.strip_prefix("--config=") {
            config = Some(path.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(config) = config else {
        return Ok(rest);
    };
    let flags = config_flags(Path::new(&config))?;
    let at = rest
        .iter()
        .position(|a| matches!(a.as_str(), "run" | "sweep" | "coverage" | "oracle"))
        .map_or(rest.len().min(1), |i| i + 1);
    rest.splice(at..at, flags);
    Ok(rest)
}

/// Parses and validates an argument vector (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv = expand_config(argv.into_iter().map(Into::into).collect())?;
    let cli = Cli::try_parse_from(argv)?;
    match cli.command {
        Command::Run(a) => episode_config(CommandKind::Run, a),
        Command::Sweep(a) => episode_config(CommandKind::Sweep, a),
        Command::Coverage(a) => {
            let env = env_spec(&a.env)?;
            let search = search_base(&env, a.search.c, a.search.gamma, a.search.rollout_cap, a.search.seed)?;
            if a.n_sims == 0 {
                return Err(usage(ErrorKind::ValueValidation, "--n-sims must be at least 1"));
            }
            Ok(CliConfig {
                command: CommandKind::Coverage,
                env,
                variants: vec![a.variant],
                n_sims: vec![a.n_sims],
                seeds: 1,
                search,
                depth_bound: 0,
                out: None,
                dot: a.dot,
                no_wall_time: false,
            })
        }
        Command::Oracle(a) => {
            let env = env_spec(&a.env)?;
            let search = search_base(&env, std::f64::consts::SQRT_2, a.gamma, DEFAULT_ROLLOUT_CAP, a.seed)?;
            Ok(CliConfig {
                command: CommandKind::Oracle,
                env,
                variants: Vec::new(),
                n_sims: Vec::new(),
                seeds: 1,
                search,
                depth_bound: a.depth_bound,
                out: a.out,
                dot: None,
                no_wall_time: false,
            })
        }
    }
}

fn episode_config(command: CommandKind, a: EpisodeArgs) -> Result<CliConfig, clap::Error> {
    let env = env_spec(&a.env)?;
    let search = search_base(&env, a.search.c, a.search.gamma, a.search.rollout_cap, a.search.seed)?;
    let mut variants = a.variant;
    variants.dedup();
    if command == CommandKind::Run && (variants.len() != 1 || a.n_sims.0.len() != 1) {
        return Err(usage(
            ErrorKind::ArgumentConflict,
            "run takes exactly one --variant and one --n-sims; use sweep for lists",
        ));
    }
    Ok(CliConfig {
        command,
        env,
        variants,
        n_sims: a.n_sims.0,
        seeds: a.seeds,
        search,
        depth_bound: 0,
        out: a.out,
        dot: None,
        no_wall_time: a.no_wall_time,
    })
}

fn chain_actions(k: usize, fixed: Option<u8>, seed: u64) -> Vec<u8> {
    match fixed {
        Some(a) => vec![a; k],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Chain::random(k, &mut rng).correct_actions().to_vec()
        }
    }
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => out.write_all(text.as_bytes()).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn run_command<E, F>(config: &CliConfig, make_env: F, out: &mut dyn Write, err: &mut dyn Write) -> Result<()>
where
    E: Environment,
    F: Fn(u64) -> Result<E> + Sync,
{
    let stdout_err = |e: std::io::Error| Error::Io {
        path: "<stdout>".into(),
        source: e,
    };
    match config.command {
        CommandKind::Run | CommandKind::Sweep => {
            let mut result = sweep(make_env, &config.variants, &config.n_sims, config.seeds, &config.search)?;
            if config.no_wall_time {
                result.records.iter_mut().for_each(|r: &mut RunRecord| r.wall_ms = 0.0);
            }
            let mut csv = Vec::new();
            harness::write_records(&result.records, &mut csv).map_err(stdout_err)?;
            write_output(config.out.as_deref(), &String::from_utf8_lossy(&csv), out)?;
            let summary = result.to_string();
            if config.out.is_some() {
                out.write_all(summary.as_bytes()).map_err(stdout_err)?;
            } else {
                err.write_all(summary.as_bytes()).map_err(stdout_err)?;
            }
        }
        CommandKind::Coverage => {
            let env = make_env(harness::env_seed(config.search.seed, 0))?;
            let search = SearchConfig {
                variant: config.variants[0],
                n_sims: config.n_sims[0],
                ..config.search.clone()
            };
            let (stats, dot) = coverage_report(&env, &search)?;
            if let Some(path) = &config.dot {
                fs::write(path, dot).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
            }
            out.write_all(render_stats(&stats).as_bytes()).map_err(stdout_err)?;
        }
        CommandKind::Oracle => {
            let env = make_env(harness::env_seed(config.search.seed, 0))?;
            let result = harness::brute_force_values(&env, &env.initial(), config.search.gamma, config.depth_bound)?;
            write_output(config.out.as_deref(), &result.to_table(), out)?;
        }
    }
    Ok(())
}

fn execute(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match &config.env {
        &EnvSpec::Chain { k, correct_action } => run_command(
            config,
            |seed| Ok(Chain::with_actions(chain_actions(k, correct_action, seed))),
            out,
            err,
        ),
        &EnvSpec::ChainLoop {
            k,
            horizon,
            correct_action,
        } => run_command(
            config,
            |seed| Ok(ChainLoop::with_actions(chain_actions(k, correct_action, seed), horizon)),
            out,
            err,
        ),
        EnvSpec::FrozenLake { map, horizon } => {
            let map = match map {
                Some(path) => fs::read_to_string(path)
                    .map_err(|e| Error::io(path, e))?
                    .parse::<LakeMap>()?,
                None => LakeMap::standard(),
            };
            let env = FrozenLake::new(map, *horizon);
            run_command(config, |_| Ok(env.clone()), out, err)
        }
        EnvSpec::Grammar {
            grammar,
            dataset,
            max_expansions,
        } => {
            let grammar = match grammar {
                Some(path) => fs::read_to_string(path)
                    .map_err(|e| Error::io(path, e))?
                    .parse::<Grammar>()?,
                None => Grammar::benchmark(),
            };
            let dataset = match dataset {
                Some(path) => Dataset::read_csv(path)?,
                None => Dataset::sqrt_benchmark(),
            };
            let env = GrammarEnv::new(grammar, dataset, *max_expansions)?;
            run_command(config, |_| Ok(env.clone()), out, err)
        }
        &EnvSpec::Synthetic {
            b,
            depth,
            tree_seed,
            interior_reward,
        } => run_command(
            config,
            |seed| Ok(SyntheticTree::new(b, depth, tree_seed.unwrap_or(seed))?.with_interior_reward(interior_reward)),
            out,
            err,
        ),
    }
}

/// Runs a parsed command. Returns 0 on success, or 1 after printing a
/// one-line `error: ...` diagnosis to `err`.
pub fn dispatch(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(config, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}
