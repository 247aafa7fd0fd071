//! Command-line front end: reads a run configuration, drives the analysis
//! library and writes tables and figures.
//!
//! Exit codes: 0 on success, 1 for data or validation failures, 2 for
//! configuration errors (including bad flags).

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use inertia::analysis::{AnalysisError, LevelTiming};
use inertia::model::ModelError;
use inertia::report::ReportError;
use inertia::{DataError, StatsError};
use thiserror::Error;

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("ConfigError: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_DATA,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "inertia", version, about = "Inertial growth analysis of real GDP per capita")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Break, mean-increment and increment-regression tables plus per-country scatter plots
    Analyze(CommonArgs),
    /// Pooled demeaned increments: Shapiro-Francia before and after trimming, histograms
    Normality(CommonArgs),
    /// Simulate a synthetic economy, optionally with a Monte-Carlo recovery check
    Simulate(SimulateArgs),
    /// Load both eras and check that every country covers its segments
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Run configuration (JSON)
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; falls back to the config's `out`, then INERTIA_OUT
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Histogram bin width in dollars
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Drop demeaned increments with |value| above this many dollars
    #[arg(long)]
    pub trim: Option<f64>,
    /// Decimals shown for real-valued table cells (display only)
    #[arg(long)]
    pub round: Option<usize>,
    /// Regress increments on the prior or the current level
    #[arg(long)]
    pub level_timing: Option<LevelTiming>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Use the linearized update G + A instead of G * exp(A/G)
    #[arg(long)]
    pub linearize: bool,
    /// Run the Monte-Carlo recovery check
    #[arg(long)]
    pub recover: bool,
    /// Base seed for the noise generator
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Loads the config and applies flag overrides; flags win.
pub fn load_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::from_file(&args.config)?;
    if let Some(v) = args.bin_width {
        cfg.bin_width = Some(v);
    }
    if let Some(v) = args.trim {
        cfg.trim = Some(v);
    }
    if let Some(v) = args.round {
        cfg.round = Some(v);
    }
    if let Some(v) = args.level_timing {
        cfg.level_timing = Some(v);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Output directory: `--out`, then the config's `out` (relative to the
/// config file), then `INERTIA_OUT`, then `inertia-out`.
pub fn output_dir(args: &CommonArgs, cfg: &RunConfig) -> PathBuf {
    if let Some(out) = &args.out {
        return out.clone();
    }
    if let Some(out) = &cfg.out {
        return cfg.resolve(out);
    }
    match std::env::var_os("INERTIA_OUT") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(config::FALLBACK_OUT),
    }
}

pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Analyze(args) => commands::analyze(args),
        Command::Normality(args) => commands::normality(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Validate(args) => commands::validate(args),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            print!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
