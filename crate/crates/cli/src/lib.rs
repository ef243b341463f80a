//! Command-line front end for `gutmanlab-core`.
//!
//! [`run`] parses arguments into an [`ExperimentConfig`], validates it,
//! executes it and writes JSON or CSV. Exit status: 0 on success, 2 for
//! usage and configuration errors, 3 for numeric or domain failures,
//! 1 when output cannot be written.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gutmanlab_core::classifiers::ThresholdMode;
use gutmanlab_core::simulation::MultiRule;
use gutmanlab_core::{Distribution, Probability, Sequence};
use thiserror::Error;

pub use config::{Command, ExperimentConfig, Format};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] gutmanlab_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } | CliError::Json(_) | CliError::Csv(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gutmanlab", version, about = "Type-based classification experiments")]
struct Cli {
    /// Output format (default: csv for reproduce-fig1, json otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; changes speed only.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Base seed for simulations.
    #[arg(long, global = true, env = "GUTMANLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Replay a JSON config (as echoed under "config" in JSON output).
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

/// Distributions: Bernoulli via `--p1/--p2` or `--p`, general via `--dists FILE`.
#[derive(Debug, Args)]
struct DistArgs {
    /// Probability of symbol 1 under the first hypothesis.
    #[arg(long)]
    p1: Option<f64>,
    /// Probability of symbol 1 under the second hypothesis.
    #[arg(long)]
    p2: Option<f64>,
    /// Comma-separated Bernoulli parameters, one per hypothesis.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["p1", "p2"])]
    p: Vec<f64>,
    /// JSON file holding an array of probability arrays.
    #[arg(long, conflicts_with_all = ["p1", "p2", "p"])]
    dists: Option<PathBuf>,
}

impl DistArgs {
    fn resolve(&self) -> Result<Vec<Distribution>, CliError> {
        let bern = |p: f64| Distribution::bernoulli(p).map_err(|e| CliError::Config(e.to_string()));
        if let Some(path) = &self.dists {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            return serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
        }
        if !self.p.is_empty() {
            return self.p.iter().map(|&p| bern(p)).collect();
        }
        match (self.p1, self.p2) {
            (Some(a), Some(b)) => Ok(vec![bern(a)?, bern(b)?]),
            _ => Err(CliError::Usage("distributions required: --p1/--p2, --p or --dists".into())),
        }
    }
}

/// Threshold: `--lambda` directly, or a mode with `--epsilon` targets.
#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, value_enum, conflicts_with = "lambda")]
    mode: Option<ModeArg>,
    /// Target error probabilities, one shared or one per hypothesis.
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    SecondOrder,
    GutmanCorrected,
    Chi2Dual,
}

impl ThresholdArgs {
    fn resolve(&self) -> Result<config::ThresholdChoice, CliError> {
        let epsilon = self
            .epsilon
            .iter()
            .map(|&e| Probability::new(e).map_err(|e| CliError::Config(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(l) = self.lambda {
            if !epsilon.is_empty() {
                return Err(CliError::Usage("--epsilon has no effect with --lambda".into()));
            }
            return Ok(config::ThresholdChoice { mode: ThresholdMode::Explicit, epsilon, lambda: Some(l) });
        }
        let mode = match self.mode.unwrap_or(ModeArg::SecondOrder) {
            ModeArg::SecondOrder => ThresholdMode::SecondOrder,
            ModeArg::GutmanCorrected => ThresholdMode::GutmanCorrected,
            ModeArg::Chi2Dual => ThresholdMode::Chi2Dual,
        };
        if epsilon.is_empty() {
            return Err(CliError::Usage("give --lambda or --epsilon".into()));
        }
        Ok(config::ThresholdChoice { mode, epsilon, lambda: None })
    }
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Divergences between two distributions.
    Divergence {
        #[command(flatten)]
        dists: DistArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        gjs: bool,
        #[arg(long)]
        kl: bool,
        #[arg(long)]
        dispersion: bool,
        #[arg(long)]
        third_moment: bool,
        /// Rényi divergence of this order.
        #[arg(long)]
        renyi: Option<f64>,
    },
    /// Error-exponent programs.
    Exponent {
        #[command(flatten)]
        dists: DistArgs,
        #[arg(long, value_enum, default_value = "f")]
        kind: config::ExponentKind,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Decision threshold for test length n.
    Threshold {
        #[command(flatten)]
        dists: DistArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        threshold: ThresholdArgs,
    },
    /// Classify a test sequence against training sequences.
    Classify {
        #[arg(long, value_enum)]
        rule: config::ClassifyRule,
        /// Training sequence as comma-separated symbols; repeat per hypothesis.
        #[arg(long = "train", required = true)]
        training: Vec<String>,
        #[arg(long)]
        test: String,
        /// Defaults to the largest symbol seen plus one.
        #[arg(long)]
        alphabet_size: Option<usize>,
        #[arg(long)]
        alpha: f64,
        /// One threshold, or two for binary-reject.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        lambda: Vec<f64>,
    },
    /// Monte Carlo error probabilities of the binary rule.
    SimulateBinary {
        #[command(flatten)]
        dists: DistArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Monte Carlo error and rejection probabilities of an M-ary rule.
    SimulateMulti {
        #[command(flatten)]
        dists: DistArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[arg(long, value_enum, default_value = "unnikrishnan")]
        rule: RuleArg,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Exact error probabilities of the binary rule by enumeration.
    Exact {
        #[command(flatten)]
        dists: DistArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
    },
    /// Worst-case type-I error over a Bernoulli grid.
    MaxType1 {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Distance between 2n·GJS under the first hypothesis and its chi-squared limit.
    WeakConvergence {
        #[command(flatten)]
        dists: DistArgs,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Plot data for the two finite-length experiments.
    #[command(name = "reproduce-fig1")]
    ReproduceFig1 {
        #[arg(long, value_enum)]
        panel: config::Panel,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Test lengths as start:stop:step.
        #[arg(long, default_value = "1000:5000:200")]
        n_grid: config::NGrid,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum RuleArg {
    Unnikrishnan,
    GutmanMulti,
}

fn parse_sequence(s: &str) -> Result<Sequence, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().map_err(|e| CliError::Config(format!("bad symbol {t:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()
        .map(Sequence)
}

fn build(cmd: Cmd, seed: u64) -> Result<Command, CliError> {
    use config::*;
    Ok(match cmd {
        Cmd::Divergence { dists, alpha, gjs, kl, dispersion, third_moment, renyi } => {
            let mut quantities = Vec::new();
            if gjs {
                quantities.push(Quantity::Gjs);
            }
            if kl {
                quantities.push(Quantity::Kl);
            }
            if dispersion {
                quantities.push(Quantity::Dispersion);
            }
            if third_moment {
                quantities.push(Quantity::ThirdMoment);
            }
            if let Some(g) = renyi {
                quantities.push(Quantity::Renyi(g));
            }
            if quantities.is_empty() {
                quantities = vec![Quantity::Gjs, Quantity::Kl, Quantity::Dispersion, Quantity::ThirdMoment];
            }
            Command::Divergence(DivergenceConfig { distributions: dists.resolve()?, alpha, quantities })
        }
        Cmd::Exponent { dists, kind, alpha, lambda, n } => {
            Command::Exponent(ExponentConfig { kind, distributions: dists.resolve()?, alpha, lambda, n })
        }
        Cmd::Threshold { dists, alpha, n, threshold } => Command::Threshold(ThresholdConfig {
            distributions: dists.resolve()?,
            alpha,
            n,
            threshold: threshold.resolve()?,
        }),
        Cmd::Classify { rule, training, test, alphabet_size, alpha, lambda } => {
            let training = training.iter().map(|s| parse_sequence(s)).collect::<Result<Vec<_>, _>>()?;
            let test = parse_sequence(&test)?;
            let seen = training.iter().chain(std::iter::once(&test)).flat_map(|s| s.0.iter()).max();
            let alphabet_size = alphabet_size.unwrap_or_else(|| seen.map_or(2, |&m| (m + 1).max(2)));
            Command::Classify(ClassifyConfig { rule, training, test, alphabet_size, alpha, lambda })
        }
        Cmd::SimulateBinary { dists, alpha, n, threshold, trials } => {
            Command::SimulateBinary(SimulateBinaryConfig {
                distributions: dists.resolve()?,
                alpha,
                n,
                threshold: threshold.resolve()?,
                trials,
                seed,
            })
        }
        Cmd::SimulateMulti { dists, alpha, n, threshold, rule, trials } => Command::SimulateMulti(SimulateMultiConfig {
            distributions: dists.resolve()?,
            alpha,
            n,
            threshold: threshold.resolve()?,
            rule: match rule {
                RuleArg::Unnikrishnan => MultiRule::Unnikrishnan,
                RuleArg::GutmanMulti => MultiRule::GutmanMulti,
            },
            trials,
            seed,
        }),
        Cmd::Exact { dists, alpha, n, lambda } => {
            Command::Exact(ExactConfig { distributions: dists.resolve()?, alpha, n, lambda })
        }
        Cmd::MaxType1 { alpha, n, lambda, grid_step, trials } => {
            Command::MaxType1(MaxType1Config { alpha, n, lambda, grid_step, trials, seed })
        }
        Cmd::WeakConvergence { dists, alpha, n, trials } => {
            let mut d = dists.resolve()?;
            if d.len() != 1 {
                return Err(CliError::Usage(format!("weak-convergence takes one distribution, got {}", d.len())));
            }
            Command::WeakConvergence(WeakConvergenceConfig { distribution: d.remove(0), alpha, n, trials, seed })
        }
        Cmd::ReproduceFig1 { panel, trials, n_grid, grid_step } => {
            Command::ReproduceFig1(Fig1Config { panel, n_grid, trials, seed, grid_step })
        }
    })
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn config_from(cli: Cli) -> Result<(ExperimentConfig, Option<usize>), CliError> {
    let cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--config cannot be combined with a subcommand".into())),
        (Some(path), None) => {
            let mut cfg = load_config(&path)?;
            if let Some(f) = cli.format {
                cfg.format = f;
            }
            if cli.out.is_some() {
                cfg.out = cli.out;
            }
            cfg
        }
        (None, Some(cmd)) => {
            let command = build(cmd, cli.seed)?;
            let default = match command {
                Command::ReproduceFig1(_) => Format::Csv,
                _ => Format::Json,
            };
            ExperimentConfig { command, format: cli.format.unwrap_or(default), out: cli.out }
        }
        (None, None) => return Err(CliError::Usage("a subcommand or --config is required; see --help".into())),
    };
    Ok((cfg, cli.threads))
}

/// Validates and executes `cfg`, writing its output.
pub fn execute(cfg: &ExperimentConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let out = commands::execute(&cfg.command)?;
    let echo = serde_json::to_value(cfg)?;
    output::emit(out, echo, cfg.format, cfg.out.as_deref(), cfg.command.name())
}

/// Entry point; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = config_from(cli).and_then(|(cfg, threads)| {
        if let Some(k) = threads {
            if k == 0 {
                return Err(CliError::Usage("--threads must be at least 1".into()));
            }
            gutmanlab_core::parallel::configure_threads(k);
        }
        execute(&cfg)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gutmanlab: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("usage: gutmanlab [OPTIONS] <COMMAND>; try --help");
            }
            e.exit_code()
        }
    }
}
