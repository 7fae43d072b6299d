use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Depth-based multivariate rank-sum tests, competitors and power studies.
#[derive(Debug, Parser)]
#[command(name = "depthrank", version, about)]
pub struct Cli {
    /// Worker threads (0 = all cores). Results do not depend on this value.
    #[arg(long, global = true, env = "DEPTHRANK_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Depth of every row of a query file relative to a reference file.
    Depth(DepthArgs),
    /// Depth rank-sum test of two samples (JSON report).
    Qtest(QtestArgs),
    /// Hotelling T² or Oja rank test of two samples (JSON report).
    Competitor(CompetitorArgs),
    /// Monte Carlo power over a parameter grid of one alternative family.
    Power(PowerArgs),
    /// Rebuild one of the power tables or figure grids.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mahalanobis,
    Halfspace,
    Projection,
    Cdf1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LocationScaleArg {
    MedianMad,
    MeanSd,
}

#[derive(Debug, Clone, Args)]
pub struct DepthOptions {
    /// Depth function.
    #[arg(long, value_enum, default_value_t = MethodArg::Projection)]
    pub method: MethodArg,
    /// Exact algorithm or random-direction approximation.
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Number of random directions in approximate mode.
    #[arg(long, default_value_t = 1000)]
    pub directions: usize,
    /// Location and scale used by projection depth.
    #[arg(long, value_enum, default_value_t = LocationScaleArg::MedianMad)]
    pub location_scale: LocationScaleArg,
    /// Seed for the random directions (power runs draw one per replication).
    #[arg(long, default_value_t = 0)]
    pub direction_seed: u64,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    /// Query points, one per row.
    #[arg(long = "x")]
    pub x: PathBuf,
    /// Reference sample.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[command(flatten)]
    pub depth: DepthOptions,
}

#[derive(Debug, Args)]
pub struct QtestArgs {
    /// Reference sample X (defines the depth).
    #[arg(long = "x")]
    pub x: PathBuf,
    /// Second sample Y.
    #[arg(long = "y")]
    pub y: PathBuf,
    #[command(flatten)]
    pub depth: DepthOptions,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Test Q(F, G) = q0 with plug-in variances instead of F = G.
    #[arg(long)]
    pub q0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompetitorTest {
    T2,
    Oja,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OjaModeArg {
    Exact,
    Sampled,
}

#[derive(Debug, Args)]
pub struct CompetitorArgs {
    #[arg(long = "x")]
    pub x: PathBuf,
    #[arg(long = "y")]
    pub y: PathBuf,
    #[arg(long, value_enum)]
    pub test: CompetitorTest,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = OjaModeArg::Exact)]
    pub oja_mode: OjaModeArg,
    /// Subsets drawn in sampled Oja mode.
    #[arg(long, default_value_t = depthrank::competitors::DEFAULT_SUBSETS)]
    pub subsets: usize,
    /// Seed for subset sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    ContaminatedLocation,
    ContaminatedScale,
    LocationScale,
    PureLocation,
    PureScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestArg {
    Q,
    T2,
    Oja,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Comma-separated values or `start:stop:step`.
    #[arg(long)]
    pub param_grid: String,
    #[arg(long)]
    pub m: usize,
    /// Second sample size (defaults to m).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum)]
    pub test: TestArg,
    #[arg(long, default_value_t = 1000)]
    pub reps: u64,
    #[arg(long, default_value_t = depthrank::powerlab::DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory for power.csv and power.manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub depth: DepthOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Table1,
    Table2,
    Table3,
    Table4,
    Fig1,
    Fig2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BudgetArg {
    Paper,
    Quick,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    pub target: TargetArg,
    #[arg(long, value_enum, default_value_t = BudgetArg::Paper)]
    pub budget: BudgetArg,
    #[arg(long, default_value_t = depthrank::powerlab::DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory for <target>.csv and <target>.manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}
