//! `slpa` command-line tool.
//!
//! Exit codes: 0 on success, 2 for user errors (bad flags, unreadable or
//! inconsistent inputs), 3 when an internal invariant is violated.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

#[cfg(test)]
use clap::CommandFactory;
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    User(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::User(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<slpa::Error> for CliError {
    fn from(e: slpa::Error) -> Self {
        CliError::User(e.to_string())
    }
}

macro_rules! user_error_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::User(e.to_string())
            }
        }
    )*};
}
user_error_from!(
    slpa::GraphError,
    slpa::CoverError,
    slpa::ThresholdError,
    slpa::BenchError,
    slpa::EngineError
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Kv,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "slpa",
    version,
    about = "Overlapping community detection by speaker-listener label propagation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect communities in an edge-list graph.
    Detect(DetectArgs),
    /// Score a cover against ground truth and/or a graph.
    Eval(EvalArgs),
    /// Generate a synthetic graph with planted overlapping communities.
    Generate(GenerateArgs),
    /// Sweep thresholds or benchmark parameters and tabulate metrics as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Number of evolution sweeps.
    #[arg(long = "T", visible_alias = "iterations", default_value_t = slpa::engine::DEFAULT_ITERATIONS)]
    pub iterations: usize,
    /// Base seed; repetition i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Use single-label propagation run to convergence instead.
    #[arg(long)]
    pub lpa: bool,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Ground-truth cover; adds NMI and overlapping-node F-score.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub r: f64,
    #[command(flatten)]
    pub run: RunArgs,
    /// Compute overlapping modularity per repetition.
    #[arg(long)]
    pub qov: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write the memory of every node for the first repetition.
    #[arg(long)]
    pub dump_memory: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub cover: PathBuf,
    #[arg(long, required_unless_present = "graph")]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args, Clone)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 10.0)]
    pub kavg: f64,
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    /// Number of overlapping nodes.
    #[arg(long, default_value_t = 100)]
    pub on: usize,
    /// Memberships per overlapping node.
    #[arg(long, default_value_t = 2)]
    pub om: usize,
    #[arg(long, default_value_t = 20)]
    pub cmin: usize,
    #[arg(long, default_value_t = 50)]
    pub cmax: usize,
}

impl BenchArgs {
    pub fn spec(&self, seed: u64) -> slpa::BenchSpec {
        slpa::BenchSpec {
            n: self.n,
            k_avg: self.kavg,
            mu: self.mu,
            overlapping_nodes: self.on,
            memberships: self.om,
            c_min: self.cmin,
            c_max: self.cmax,
            seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub bench: BenchArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "bench")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep thresholds on this graph instead of generating benchmarks.
    #[arg(long, conflicts_with_all = ["om_list", "n_list"])]
    pub graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    pub truth: Option<PathBuf>,
    /// Thresholds, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.08,0.09,0.1"
    )]
    pub r: Vec<f64>,
    /// Memberships-per-overlapping-node grid for generated benchmarks.
    #[arg(long, value_delimiter = ',', conflicts_with = "n_list")]
    pub om_list: Option<Vec<usize>>,
    /// Node-count grid for generated benchmarks.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[command(flatten)]
    pub bench: BenchArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let outcome = std::panic::catch_unwind(|| match cli.command {
        Command::Detect(args) => commands::detect(&args),
        Command::Eval(args) => commands::eval(&args),
        Command::Generate(args) => commands::generate(&args),
        Command::Sweep(args) => commands::sweep(&args),
    });
    let result = outcome.unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".to_string());
        Err(CliError::Internal(msg))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::User("x".into()).exit_code(), 2);
        assert_eq!(CliError::Internal("x".into()).exit_code(), 3);
        let from_core: CliError = slpa::Threshold::new(2.0).unwrap_err().into();
        assert_eq!(from_core.exit_code(), 2);
    }

    #[test]
    fn arguments_parse() {
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from(["slpa", "detect", "--graph", "g.txt", "--T", "30"]).unwrap();
        let Command::Detect(args) = cli.command else {
            panic!("expected detect");
        };
        assert_eq!(args.run.iterations, 30);
        assert_eq!(args.r, 0.1);
    }
}
