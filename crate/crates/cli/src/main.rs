//! Experiment harness for the coded edge-computing simulator.
//!
//! Subcommands: `run` (one scheme across a power list), `sweep` (a
//! one-parameter grid), and `verify` (invariant self-checks). Every run is
//! reproducible from its master seed; CSV output is byte-identical across
//! repeats of the same spec.

mod report;
mod run;
mod spec;
mod sweep;
mod verify;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ucec_core::SchemeTag;

use crate::run::DumpPaths;
use crate::spec::ExperimentSpec;

/// Harness errors split by exit code: config errors exit 2, execution or
/// verification failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Failure(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(reason) => write!(f, "invalid configuration: {reason}"),
            CliError::Failure(reason) => write!(f, "{reason}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "ucec", version, about = "Coded edge computing simulator and metrics suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme across the power list and write report.json plus
    /// results.csv.
    Run(RunArgs),
    /// Run a one-parameter grid and write sweep.json plus sweep.csv.
    Sweep(SweepArgs),
    /// Run the invariant self-checks.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct SpecArgs {
    /// Scheme: ucec | zf-ready | ain22 | tdma | partitioned-ucec.
    #[arg(long)]
    scheme: Option<SchemeTag>,
    /// Number of mobile users K.
    #[arg(long)]
    users: Option<usize>,
    /// Number of edge nodes M.
    #[arg(long)]
    nodes: Option<usize>,
    /// Direction lattice parameter.
    #[arg(long = "N")]
    direction_n: Option<u32>,
    /// Number of output functions.
    #[arg(long = "B")]
    outputs: Option<usize>,
    /// Input vector dimension.
    #[arg(long = "Q")]
    input_dim: Option<usize>,
    /// Comma-separated transmit power list, e.g. 1e2,1e4,1e6.
    #[arg(long, value_delimiter = ',')]
    powers: Option<Vec<f64>>,
    /// Monte-Carlo trials per power point.
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed; the full schedule derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Disable receiver noise (invariant testing).
    #[arg(long)]
    noiseless: bool,
    /// JSON config file providing the same fields; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SpecArgs {
    fn resolve(&self) -> Result<ExperimentSpec, CliError> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::from_config_file(path)?,
            None => ExperimentSpec::default(),
        };
        if let Some(v) = self.scheme {
            spec.scheme = v;
        }
        if let Some(v) = self.users {
            spec.users = v;
        }
        if let Some(v) = self.nodes {
            spec.nodes = v;
        }
        if let Some(v) = self.direction_n {
            spec.direction_n = v;
        }
        if let Some(v) = self.outputs {
            spec.outputs = v;
        }
        if let Some(v) = self.input_dim {
            spec.input_dim = v;
        }
        if let Some(v) = &self.powers {
            spec.powers = v.clone();
        }
        if let Some(v) = self.trials {
            spec.trials = v;
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if self.noiseless {
            spec.noiseless = true;
        }
        Ok(spec)
    }
}

/// Default output directory: --out, else UCEC_OUT_DIR, else ./ucec-out.
fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os("UCEC_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ucec-out"))
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Output directory (default: $UCEC_OUT_DIR or ./ucec-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dump trial 0's transcript as JSON.
    #[arg(long)]
    dump_transcript: Option<PathBuf>,
    /// Dump trial 0's dataset and input block as JSON.
    #[arg(long)]
    dump_model: Option<PathBuf>,
    /// Dump trial 0's channel realizations as JSON.
    #[arg(long)]
    dump_channel: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Grid axis: N=1,2,3 or scheme=ucec,tdma or users=1,2,3.
    #[arg(long)]
    grid: Option<String>,
    /// Output directory (default: $UCEC_OUT_DIR or ./ucec-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VerifyLevel {
    Quick,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    /// quick: neutralization + load accounting; full: adds DoF slopes.
    #[arg(value_enum, default_value = "quick")]
    level: VerifyLevel,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let spec = args.spec.resolve()?;
            let dumps = DumpPaths {
                transcript: args.dump_transcript,
                model: args.dump_model,
                channel: args.dump_channel,
            };
            run::command(&spec, &out_dir(&args.out), &dumps)
        }
        Command::Sweep(args) => {
            let grid_text = args
                .grid
                .as_deref()
                .ok_or_else(|| CliError::Config("sweep requires --grid key=v1,v2,...".into()))?;
            let grid = sweep::Grid::parse(grid_text)?;
            let spec = args.spec.resolve()?;
            sweep::command(&spec, &grid, &out_dir(&args.out))
        }
        Command::Verify(args) => {
            let level = match args.level {
                VerifyLevel::Quick => verify::Level::Quick,
                VerifyLevel::Full => verify::Level::Full,
            };
            verify::command(level)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Failure(_) => ExitCode::from(1),
            }
        }
    }
}
