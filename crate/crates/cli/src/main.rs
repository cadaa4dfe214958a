//! `lvspeed`: predict the parallel speedup of Las Vegas solvers from their
//! sequential runtime distribution.
//!
//! Stages communicate through files so each can be rerun on its own:
//! `collect` -> runs CSV -> `fit` -> JSON -> `predict` -> curve CSV, with
//! `simulate` (bootstrap) and `parallel` (multi-walk measurement) feeding
//! `report`.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lasvegas::{Family, ProblemKind, Unit};

#[derive(Parser)]
#[command(name = "lvspeed", version, about = "Speedup prediction for independent multi-walk Las Vegas solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sequential solver repeatedly and record runtimes.
    Collect(CollectArgs),
    /// Fit runtime distributions and test them with Kolmogorov-Smirnov.
    Fit(FitArgs),
    /// Predict speedups from a fitted distribution.
    Predict(PredictArgs),
    /// Estimate speedups by bootstrap min-resampling of a runtime sample.
    Simulate(SimulateArgs),
    /// Measure first-solution-wins parallel speedups.
    Parallel(ParallelArgs),
    /// Join predicted, bootstrap and measured speedups into one table.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
pub struct SolverFlags {
    #[arg(long, value_parser = parse_problem)]
    pub problem: ProblemKind,
    /// Problem size: square side, number of notes, or array size.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    /// Base seed; run or worker k uses seed + k.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub tabu: Option<u32>,
    #[arg(long)]
    pub reset_fraction: Option<f64>,
    #[arg(long)]
    pub reset_trigger: Option<usize>,
    #[arg(long)]
    pub local_min_acceptance: Option<f64>,
    /// Iterations before a restart from scratch (default: never).
    #[arg(long)]
    pub max_iterations: Option<u64>,
    /// Flat key=value file with solver parameters; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct CollectArgs {
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: u64,
    /// Runs CSV path (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FamilyChoice {
    Exp,
    Lognormal,
    Gaussian,
    All,
}

impl FamilyChoice {
    pub fn families(self) -> Vec<Family> {
        match self {
            FamilyChoice::Exp => vec![Family::ShiftedExponential],
            FamilyChoice::Lognormal => vec![Family::ShiftedLognormal],
            FamilyChoice::Gaussian => vec![Family::ShiftedGaussian],
            FamilyChoice::All => Family::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum UnitChoice {
    Iterations,
    Seconds,
}

impl From<UnitChoice> for Unit {
    fn from(u: UnitChoice) -> Self {
        match u {
            UnitChoice::Iterations => Unit::Iterations,
            UnitChoice::Seconds => Unit::Seconds,
        }
    }
}

#[derive(Args)]
pub struct FitArgs {
    /// Runs CSV with an `iterations` and/or `seconds` column.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FamilyChoice::All)]
    pub family: FamilyChoice,
    /// Significance level of the Kolmogorov-Smirnov test.
    #[arg(long, default_value_t = 0.05, value_parser = parse_probability)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = UnitChoice::Iterations)]
    pub unit: UnitChoice,
    /// JSON path (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Output of `fit`, or a bare distribution object.
    #[arg(long)]
    pub fit: PathBuf,
    #[command(flatten)]
    pub cores: CoreFlags,
    /// Predict even when the fit was rejected.
    #[arg(long)]
    pub force: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
pub struct CoreFlags {
    /// Comma-separated, strictly increasing core counts.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u32).range(1..))]
    pub cores: Option<Vec<u32>>,
    /// Every core count from 1 to this value.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub cores_upto: Option<u32>,
}

impl CoreFlags {
    pub fn list(&self) -> Vec<u32> {
        match (&self.cores, self.cores_upto) {
            (Some(c), _) => c.clone(),
            (None, Some(max)) => (1..=max).collect(),
            (None, None) => Vec::new(),
        }
    }
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[command(flatten)]
    pub cores: CoreFlags,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub resamples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = UnitChoice::Iterations)]
    pub unit: UnitChoice,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct ParallelArgs {
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Comma-separated worker counts.
    #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Vec<u32>,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Runs CSV of sequential runs on the same problem.
    #[arg(long)]
    pub baseline: PathBuf,
    /// Per-trial records CSV (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Measured speedup CSV, one row per worker count.
    #[arg(long)]
    pub measured: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Curve CSV written by `predict`.
    #[arg(long)]
    pub predicted: Option<PathBuf>,
    /// Curve CSV written by `simulate`.
    #[arg(long)]
    pub bootstrap: Option<PathBuf>,
    /// Measured CSV written by `parallel --measured`.
    #[arg(long)]
    pub measured: Option<PathBuf>,
    /// Fit JSON whose best accepted family is summarized.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Problem label for the table, e.g. "Costas 12".
    #[arg(long, default_value = "")]
    pub label: String,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn parse_problem(s: &str) -> Result<ProblemKind, String> {
    s.parse().map_err(|e: lasvegas::Error| e.to_string())
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

/// Failure classes mapped to process exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or arguments (exit 2).
    Usage(String),
    /// Unreadable or ill-formed input, or a computation that failed (exit 3).
    Data(anyhow::Error),
    /// A statistical test rejected the input and `--force` was not given (exit 4).
    Rejected(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Rejected(_) => 4,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

pub type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Collect(a) => commands::collect(a),
        Command::Fit(a) => commands::fit(a),
        Command::Predict(a) => commands::predict(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Parallel(a) => commands::parallel(a),
        Command::Report(a) => commands::report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Data(err) => eprintln!("error: {err:#}"),
                Failure::Rejected(msg) => eprintln!("rejected: {msg}"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
