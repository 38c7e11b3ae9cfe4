//! `ibmagnet`: fit magnet curves, synthesize spring banks, check magnetic
//! spring balance, replay pull tests and evaluate the clamp.
//!
//! Exit status is 0 on success, 2 for bad input (including usage errors)
//! and 1 for anything else.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ibmagnet",
    version,
    about = "Design and analysis tools for internally-balanced magnetic units"
)]
pub struct Cli {
    /// Directory for CSV, curve and SVG outputs.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plot: bool,
    /// Seed for the optimizer's random starts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a power law `A / (x + c)^p` to a `x_mm,force_N` CSV.
    Fit(FitArgs),
    /// Optimize a bank of cam-limited linear springs under a curve.
    Synth(SynthArgs),
    /// Sweep the internal force of a magnetic spring unit.
    Balance(BalanceArgs),
    /// Simulate frame-pull and rod-pull tests.
    Pulltest(PullArgs),
    /// Evaluate a clamp scenario.
    Clamp(ClampArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub samples: PathBuf,
    /// Fix the exponent instead of fitting it.
    #[arg(long, short = 'p')]
    pub exponent: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Curve file (TOML) or samples CSV.
    pub curve: PathBuf,
    /// Number of springs.
    #[arg(long, short = 'n', value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    /// Stroke in mm.
    #[arg(long)]
    pub x_max: f64,
    /// One-column `k_N_per_mm` CSV of available springs.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    /// Built-in unit name or unit file.
    pub unit: String,
    #[arg(long, default_value_t = ibmagnet::magnetic_spring::DEFAULT_SWEEP_GRID)]
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Frame,
    Rod,
    Both,
}

#[derive(Debug, Args)]
pub struct PullArgs {
    /// Built-in unit name or unit file.
    pub unit: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    /// Crosshead step in mm.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Crosshead travel in mm; twice the stroke plus hook slack when omitted.
    #[arg(long)]
    pub sweep_end: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClampModeArg {
    Replay,
    Model,
}

#[derive(Debug, Args)]
pub struct ClampArgs {
    /// Built-in scenario name or scenario file.
    pub scenario: String,
    #[arg(long, value_enum, default_value_t = ClampModeArg::Replay)]
    pub mode: ClampModeArg,
    /// Share of the control force reaching the object (model mode).
    #[arg(long)]
    pub efficiency: Option<f64>,
    /// Finger and object stiffness in series, N/mm (model mode).
    #[arg(long)]
    pub contact_stiffness: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_user_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
