//! Config-driven runner for the mesoleads simulator.
//!
//! Each subcommand reads a TOML experiment file, resolves every default,
//! runs one solver and writes CSV artifacts plus a `manifest.json` into the
//! output directory. Exit codes: 0 success, 1 numerical failure (or a failed
//! comparison), 2 configuration or input error.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod compare;
pub mod config;
pub mod output;

pub use config::{ExperimentConfig, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("input error: {0}")]
    Input(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {reason}")]
    Io { path: PathBuf, reason: String },

    #[error("comparison failed: {0}")]
    CompareFailed(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, reason: impl Display) -> Self {
        Self::Config {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    pub fn io(path: &Path, reason: impl Display) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Input(_) => 2,
            Self::Numerical(_) | Self::Io { .. } | Self::CompareFailed(_) => 1,
        }
    }
}

impl From<mesoleads::Error> for CliError {
    fn from(e: mesoleads::Error) -> Self {
        match e {
            mesoleads::Error::InvalidParameter { name, reason } => Self::config(name, reason),
            other => Self::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mesoleads", version, about = "Driven open fermionic systems with mesoscopic leads")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory; overrides `output.dir` from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Record that the run is free of random numbers. No solver draws any,
    /// so this only documents the guarantee in the manifest.
    #[arg(long, global = true)]
    pub seedless: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lead-mode tables and effective spectral functions.
    Grid,
    /// Time-domain Lyapunov evolution with thermodynamic bookkeeping.
    Evolve,
    /// Static non-equilibrium steady state.
    Steady,
    /// Limit cycle of a periodically driven system.
    Floquet,
    /// Rectification sweep over (lambda, omega / lambda) for the two-dot model.
    FloquetSweep,
    /// Chain-mapped baths evolved unitarily (finite-time reference).
    ChainOracle,
    /// Classical rate equation for a single level.
    PauliOracle,
    /// Column-wise differences between two CSV outputs.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub run_a: PathBuf,
    pub run_b: PathBuf,
    /// Columns to compare; `name` or `a_name:b_name`. Default: all shared
    /// columns except `t`.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Pass threshold on the max absolute difference.
    #[arg(long)]
    pub max_threshold: Option<f64>,
    /// Pass threshold on the difference of window means.
    #[arg(long)]
    pub mean_threshold: Option<f64>,
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Compare(args) => compare::run(cli, args),
        cmd => commands::run(cli, cmd),
    }
}
