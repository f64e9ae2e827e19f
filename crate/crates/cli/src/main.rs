//! `bicoh` — simulate, analyze, filter, report.
//!
//! Exit codes: 0 success, 1 I/O error (missing or corrupt files), 2
//! validation error (bad flags, bad config values).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Environment variable supplying the default output directory.
pub const OUT_DIR_ENV: &str = "BICOH_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "bicoh",
    version,
    about = "Bicoherence analysis of (non)stationary signals with Monte Carlo surrogate filtering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a two-mass oscillator scenario and write the test signal.
    Simulate(SimulateArgs),
    /// Compute spectrogram, bispectrum and bicoherence of a signal file.
    Analyze(AnalyzeArgs),
    /// Analyze, then keep only cells significant against surrogate nulls.
    Filter(FilterArgs),
    /// Verify a run manifest (re-hash outputs) and print its summary.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output directory (default: $BICOH_OUT_DIR or the current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated output kinds: csv, bin, png.
    #[arg(long, default_value = "csv,bin,png")]
    format: String,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Master seed override (defaults to the config's `seed`).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Clone)]
struct PlanArgs {
    /// Signal file: `.f64` (raw little-endian samples) or CSV (time_s,value).
    #[arg(long)]
    signal: PathBuf,
    /// Sample rate in Hz (required for `.f64`, overrides the CSV time axis).
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Samples per segment (even, >= 8).
    #[arg(long, default_value_t = 512)]
    segment_length: usize,
    /// Overlap fraction in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    /// Window function: hann or boxcar.
    #[arg(long, default_value = "hann")]
    window: bicoh_core::spectral::Window,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    plan: PlanArgs,
    /// Confidence level in (0, 1).
    #[arg(long, default_value_t = bicoh_core::surrogate::DEFAULT_ALPHA)]
    alpha: f64,
    /// Surrogate realizations per frequency cell.
    #[arg(long, default_value_t = bicoh_core::surrogate::DEFAULT_REALIZATIONS)]
    realizations: usize,
    /// Master seed of the surrogate streams.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads for the surrogate sweep (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Plotted-subregion bound: report and plot cells with f1-bin <= k_max
    /// (default: n / 4).
    #[arg(long)]
    k_max: Option<usize>,
    /// Also dump the surrogate histogram of one cell, given as `k,l` bins.
    #[arg(long)]
    histogram_cell: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Manifest file written by a previous run.
    #[arg(long)]
    manifest: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Filter(args) => commands::filter(args),
        Command::Report(args) => commands::report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_io_like() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
