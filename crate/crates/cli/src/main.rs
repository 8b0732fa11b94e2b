//! `geointerp`: densify sparse fields from the command line and run the
//! sampling, evaluation and timing experiments.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O or malformed input file,
//! 3 numeric or domain error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geodesic_interp::metrics::Metric;
use geodesic_interp::params::{DEFAULT_SIGMA_R, DEFAULT_SIGMA_S};
use geodesic_interp::sampling::{Density, SamplingMode};
use geodesic_interp::Method;

#[derive(Debug, Parser)]
#[command(
    name = "geointerp",
    version,
    about = "Geodesic-affinity sparse-to-dense interpolation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Interpolate a sparse field to a dense one.
    Interpolate(InterpolateArgs),
    /// Draw a sparse sample set from a dense ground truth.
    Sample(SampleArgs),
    /// Score an estimate against ground truth; prints CSV.
    Evaluate(EvaluateArgs),
    /// RMSE over a grid of methods and densities; prints CSV.
    Sweep(SweepArgs),
    /// Wall time over sample densities on one guidance image; prints CSV.
    Bench(BenchArgs),
    /// Write a synthetic disparity / guidance pair.
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
struct Bandwidths {
    /// Range bandwidth, in guidance units on a 0..255 scale.
    #[arg(long, default_value_t = DEFAULT_SIGMA_R)]
    sigma_r: f64,
    /// Spatial bandwidth, in pixels.
    #[arg(long, default_value_t = DEFAULT_SIGMA_S)]
    sigma_s: f64,
}

#[derive(Debug, Args)]
struct InterpolateArgs {
    /// Guidance image (PGM, PPM or PFM).
    #[arg(long)]
    guidance: PathBuf,
    /// Sparse samples in GEOSPARSE text form.
    #[arg(long)]
    sparse: PathBuf,
    #[arg(long, default_value = "geodesic")]
    method: Method,
    #[command(flatten)]
    bandwidths: Bandwidths,
    /// Dense output: FLO for two channels, PFM otherwise.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Dense ground truth (PFM, FLO, PGM or PPM).
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    guidance: PathBuf,
    #[arg(long)]
    mode: SamplingMode,
    /// Fraction of pixels to keep, as a decimal or `1/k`.
    #[arg(long)]
    density: Density,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    estimate: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Single-channel image; non-zero pixels are scored.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, default_value = "rmse")]
    metric: Metric,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    guidance: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "geodesic,bilateral,nw")]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', required = true)]
    densities: Vec<Density>,
    #[arg(long, default_value = "regular")]
    mode: SamplingMode,
    #[command(flatten)]
    bandwidths: Bandwidths,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    guidance: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    densities: Vec<Density>,
    #[arg(long, value_delimiter = ',', default_value = "geodesic")]
    methods: Vec<Method>,
    /// Runs per cell; the fastest is reported.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    repeats: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    bandwidths: Bandwidths,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FixtureArgs {
    #[arg(long, default_value_t = 256)]
    width: usize,
    #[arg(long, default_value_t = 256)]
    height: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Disparity output (PFM).
    #[arg(long)]
    out_gt: PathBuf,
    /// Guidance output (PPM).
    #[arg(long)]
    out_guidance: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Interpolate(a) => commands::interpolate(a),
        Command::Sample(a) => commands::sample(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Bench(a) => commands::bench(a),
        Command::Fixture(a) => commands::fixture(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geointerp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
