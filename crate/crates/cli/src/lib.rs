//! Command-line driver: every run is described by a [`RunConfig`] resolved
//! from defaults, an optional TOML file and command-line flags, in that
//! order of precedence. The resolved config and seed are written into every
//! artifact.

mod artifacts;
mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "repalign", version, about = "Fit feature reweightings to similarity judgments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    /// Comma-separated ridge penalties.
    #[arg(long, global = true, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// average, complete or single.
    #[arg(long, global = true)]
    pub linkage: Option<String>,
    #[arg(long, global = true)]
    pub mds_dims: Option<usize>,
    /// max-shift or gram-distance.
    #[arg(long, global = true)]
    pub dissimilarity: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare the raw feature Gram matrix with observed similarities.
    EvalRaw(PairArgs),
    /// Fit per-feature weights by cross-validated ridge regression.
    Fit(FitArgs),
    /// Refit on shuffled features to measure chance performance.
    Baseline(BaselineArgs),
    /// Fit several feature files against one similarity matrix.
    DepthSweep(SweepArgs),
    /// Cross-validated classification with original and reweighted features.
    Reclassify(ReclassifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::EvalRaw(_) => "eval-raw",
            Command::Fit(_) => "fit",
            Command::Baseline(_) => "baseline",
            Command::DepthSweep(_) => "depth-sweep",
            Command::Reclassify(_) => "reclassify",
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct PairArgs {
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub similarity: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub inputs: PairArgs,
    /// Also fit nonnegative elastic-net weights.
    #[arg(long)]
    pub nonneg: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub l1_ratio: Option<f64>,
    /// Comma-separated elastic-net penalties to choose from by cross-validation.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Scale feature rows to unit norm before fitting.
    #[arg(long)]
    pub normalize_rows: bool,
    /// Scale design columns to unit variance before fitting.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Default, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub inputs: PairArgs,
    /// rows, columns or combined; repeat or comma-separate. Default: all.
    #[arg(long = "kind", value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
    /// Shuffle seeds, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Default, Args)]
pub struct SweepArgs {
    /// Feature files in sweep order; repeat the flag.
    #[arg(long)]
    pub features: Vec<PathBuf>,
    #[arg(long)]
    pub similarity: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct ReclassifyArgs {
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Classifier L2 penalty.
    #[arg(long)]
    pub l2: Option<f64>,
}

/// Resolves the configuration and runs the selected command. Returns the
/// paths written, in write order.
pub fn run(cli: &Cli) -> anyhow::Result<Vec<PathBuf>> {
    let config = RunConfig::resolve(cli)?;
    commands::run(cli.command.name(), &config)
}
