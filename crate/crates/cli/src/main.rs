//! `detpp`: command-line driver for DPP densities, samplers and experiments.
//!
//! Exit status: 0 when every checked property holds, 1 on a property violation,
//! 2 on usage, configuration or I/O errors.

#![forbid(unsafe_code)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "detpp",
    version,
    about = "Determinantal point processes on finite ground sets"
)]
pub struct Cli {
    /// Seed for all randomness; overrides the seed in --config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// JSON configuration for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file (stdout when absent). Experiments also write `<out>.meta.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for parallel experiments.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw samples from a parameter file (CSV `draw_index,config_bitmask`).
    Sample(SampleArgs),
    /// Tabulate a density over all configurations (CSV `config_bitmask,probability`).
    Density(DensityArgs),
    /// Exact Hellinger distance between two parameter files (JSON).
    Hellinger(HellingerArgs),
    /// Random-instance sweep of the Hellinger bounds (CSV).
    BoundsSweep(BoundsSweepArgs),
    /// Random-instance sweep of the wedge isometry (CSV).
    IsometrySweep(SweepArgs),
    /// Compare both samplers with exact tables (CSV).
    SamplerCheck(SamplerCheckArgs),
    /// Select a density from samples with the pairwise-test estimator (JSON).
    Estimate,
    /// Risk of the estimator against the sample size (CSV).
    RiskCurve(RiskCurveArgs),
    /// Two-candidate selection check at a fixed Hellinger separation (JSON).
    TwoCandidate(TwoCandidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SamplerKind {
    /// Bernoulli active set followed by the sequential projection sampler.
    TwoStep,
    /// Inverse-CDF draws from the exact table.
    Oracle,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Parameter file.
    #[arg(long)]
    pub params: PathBuf,
    /// Number of draws.
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "two-step")]
    pub sampler: SamplerKind,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long)]
    pub params: PathBuf,
}

#[derive(Debug, Args)]
pub struct HellingerArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub other: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub p_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundsSweepArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Compare every parameter set with itself.
    #[arg(long)]
    pub degenerate: bool,
}

#[derive(Debug, Args)]
pub struct SamplerCheckArgs {
    #[arg(long)]
    pub draws: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RiskCurveArgs {
    #[arg(long)]
    pub replications: Option<usize>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct TwoCandidateArgs {
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
