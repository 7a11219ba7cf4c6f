//! Flag definitions.

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "monotrend",
    version,
    about = "Monotone trend estimation under dependent errors: fitting, simulation, limit-law tabulation"
)]
pub struct Cli {
    /// Cap the number of worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Increase logging detail on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the isotonic trend and both endpoint estimators to a CSV series.
    Fit(FitArgs),
    /// Synthesize a series: a monotone trend plus AR(1) fluctuations.
    Simulate(SimulateArgs),
    /// Tabulate quantiles of one of the three limiting distributions.
    Limits(LimitsArgs),
    /// Run a replication experiment and write empirical-CDF tables.
    Tables(TablesArgs),
    /// Sample autocorrelations of a CSV series.
    Acf(AcfArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input CSV; header row auto-detected, `#` lines ignored.
    #[arg(long)]
    pub input: String,

    /// 1-based value column (default: the last column).
    #[arg(long)]
    pub column: Option<usize>,

    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out_dir: String,

    /// Penalty rate for the penalized endpoint estimate (default 1).
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Fixed penalty, overriding the rate rule.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Boundary-correction rate for the interior endpoint estimate
    /// (default 1).
    #[arg(long)]
    pub ell: Option<f64>,

    /// Fixed evaluation index (1-based), overriding the rate rule.
    #[arg(long)]
    pub m: Option<usize>,

    /// Residual ACF depth (default: n/4).
    #[arg(long)]
    pub max_lag: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Series length.
    #[arg(long)]
    pub n: usize,

    /// Trend shape: sqrt, identity or square.
    #[arg(long)]
    pub phi: String,

    /// AR(1) coefficient, |rho| < 1.
    #[arg(long)]
    pub rho: f64,

    /// Marginal standard deviation of the fluctuations.
    #[arg(long, default_value_t = 0.25)]
    pub marginal_sd: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Extra initial steps to discard (the start is already stationary).
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,

    /// Output CSV path.
    #[arg(long)]
    pub out: String,

    /// Also write the trend and noise columns.
    #[arg(long)]
    pub components: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Law {
    Chernoff,
    Boundary,
    Penalized,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    /// Which limiting distribution to sample.
    #[arg(value_enum)]
    pub law: Law,

    /// Monte Carlo replications.
    #[arg(long, default_value_t = 100_000)]
    pub reps: usize,

    /// Grid step.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,

    /// Override the default lower grid end.
    #[arg(long)]
    pub lower: Option<f64>,

    /// Override the default upper grid end.
    #[arg(long)]
    pub upper: Option<f64>,

    /// Boundary law: window length of the restriction.
    #[arg(long)]
    pub ell: Option<f64>,

    /// Boundary/penalized laws: noise scale (long-run standard deviation).
    #[arg(long)]
    pub sigma: Option<f64>,

    /// Boundary/penalized laws: trend slope at the right endpoint.
    #[arg(long)]
    pub phi1_prime: Option<f64>,

    /// Penalized law: penalty rate.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Penalized law: trend value at the right endpoint.
    #[arg(long)]
    pub phi1: Option<f64>,

    /// Probabilities to tabulate, comma separated.
    #[arg(long)]
    pub probs: Option<String>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output JSON path (default: `<law>_quantiles.json`).
    #[arg(long)]
    pub out: Option<String>,

    /// Cache directory for quantile tables keyed by provenance.
    #[arg(long, default_value = ".monotrend-cache")]
    pub cache_dir: String,

    /// Recompute even when a cached table exists.
    #[arg(long)]
    pub fresh: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Interior,
    Boundary,
    Penalized,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Which tabulation to run.
    #[arg(long, value_enum)]
    pub which: Which,

    #[arg(long, default_value_t = 150)]
    pub n: usize,

    /// Replications per cell (10,000 reproduces the full-scale tables).
    #[arg(long, default_value_t = 2_000)]
    pub reps: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// AR(1) coefficients, comma separated.
    #[arg(long, default_value = "0.5,0.9")]
    pub rhos: String,

    /// Trend shapes, comma separated.
    #[arg(long, default_value = "square,identity,sqrt")]
    pub phis: String,

    /// Interior evaluation points, comma separated fractions in (0,1).
    #[arg(long, default_value = "0.333333333333,0.5,0.666666666667")]
    pub t0s: String,

    #[arg(long, default_value_t = 0.25)]
    pub marginal_sd: f64,

    /// Penalized tabulation: penalty rate (required).
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Penalized tabulation: fixed penalty overriding the rate rule.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Boundary tabulation: correction rate (required).
    #[arg(long)]
    pub ell: Option<f64>,

    /// Boundary tabulation: fixed index overriding the rate rule.
    #[arg(long)]
    pub m: Option<usize>,

    /// Replications for the matched limit-law columns (0 to skip them).
    #[arg(long, default_value_t = 20_000)]
    pub asym_reps: usize,

    /// Grid step for the limit-law samplers.
    #[arg(long, default_value_t = 1e-3)]
    pub limit_step: f64,

    /// Replications for the interior quantile probes.
    #[arg(long, default_value_t = 200_000)]
    pub chernoff_reps: usize,

    #[arg(long, default_value = ".monotrend-cache")]
    pub cache_dir: String,

    /// Recompute the probe table even when cached.
    #[arg(long)]
    pub fresh: bool,

    #[arg(long, default_value = ".")]
    pub out_dir: String,

    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AcfArgs {
    /// Input CSV; header row auto-detected, `#` lines ignored.
    #[arg(long)]
    pub input: String,

    /// 1-based value column (default: the last column).
    #[arg(long)]
    pub column: Option<usize>,

    /// Largest lag (default: n/4).
    #[arg(long)]
    pub max_lag: Option<usize>,

    /// Output CSV path.
    #[arg(long)]
    pub out: String,
}
