//! `e91` — photon-budget allocation, key rate and CHSH statistics from the
//! command line.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 on I/O failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use e91_core::DeadTimeMode;
use thiserror::Error;

use crate::config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl From<e91_core::Error> for CliError {
    fn from(e: e91_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Io(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "e91", version, about = "Photon-budget allocation for E91 receivers")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. They override values from `--config`.
#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON file with run settings (keys named like the flags)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for output files
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write SVG plots next to the CSV output
    #[arg(long, global = true)]
    svg: bool,
    /// Seed for the Monte Carlo sampler
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Photon pairs per second [default: 1e6]
    #[arg(long, global = true)]
    budget: Option<f64>,
    /// Werner-state visibility V [default: 0.95]
    #[arg(long, global = true)]
    visibility: Option<f64>,
    /// Reflectance of Alice's splitter (fraction sent to the key analyzer) [default: 0.5]
    #[arg(long = "r-a", global = true, allow_negative_numbers = true)]
    r_a: Option<f64>,
    /// Reflectance of Bob's splitter (fraction sent to the H/V analyzer) [default: 0.5]
    #[arg(long = "r-b", global = true, allow_negative_numbers = true)]
    r_b: Option<f64>,
    /// Detector dead time in picoseconds [default: 1]
    #[arg(long, global = true)]
    dead_time_ps: Option<f64>,
    /// Photon detection efficiency [default: 1]
    #[arg(long, global = true)]
    pde: Option<f64>,
    /// Dark counts per second [default: 0]
    #[arg(long, global = true)]
    dark_counts: Option<f64>,
    /// Where the detector response is applied: group or per_detector [default: group]
    #[arg(long, global = true)]
    mode: Option<DeadTimeMode>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the rate report for one operating point as JSON
    Rate,
    /// Key rate over the reflectance grid (sweep.csv)
    Sweep,
    /// Grid search for the best reflectances (optimum.json, sweep.csv)
    Optimize {
        /// Second pass at 10x finer steps around the coarse optimum
        #[arg(long)]
        refine: bool,
    },
    /// Per-budget normalized key rate with r_a = r_b = r (heatmap.csv)
    Heatmap,
    /// CHSH uncertainty and classical-region probability surface (uncertainty.csv)
    Uncertainty,
    /// Detector response curves (dead_time.csv, detector_response.csv)
    Detector,
    /// Monte Carlo check of the CHSH statistics (mc.json)
    Mc {
        /// Number of sampled blocks [default: 10000]
        #[arg(long)]
        trials: Option<usize>,
        /// Also write per-trial values to mc_trials.csv
        #[arg(long)]
        dump_trials: bool,
    },
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    macro_rules! apply {
        ($($field:ident),*) => {$( if let Some(v) = c.$field.clone() { cfg.$field = v; } )*};
    }
    apply!(out, seed, budget, visibility, r_a, r_b, dead_time_ps, pde, dark_counts, mode);
    cfg.svg |= c.svg;
    match &cli.command {
        Command::Optimize { refine: true } => cfg.refine = true,
        Command::Mc { trials: Some(n), .. } => cfg.trials = *n,
        _ => {}
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = build_config(&cli)?;
    let resolved = cfg.resolve()?;
    match cli.command {
        Command::Rate => commands::rate(&resolved),
        Command::Sweep => commands::sweep(&cfg, &resolved),
        Command::Optimize { .. } => commands::optimize(&cfg, &resolved),
        Command::Heatmap => commands::heatmap(&cfg, &resolved),
        Command::Uncertainty => commands::uncertainty(&cfg, &resolved),
        Command::Detector => commands::detector(&cfg, &resolved),
        Command::Mc { dump_trials, .. } => commands::mc(&cfg, &resolved, dump_trials),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
