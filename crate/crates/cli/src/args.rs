use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lava_core::{EstimatorKind, Penalty};

/// Lava and post-lava estimation for sparse plus dense signals.
///
/// Exit codes: 0 success, 2 input error, 3 numerical failure. The
/// LAVA_THREADS environment variable caps the worker threads.
#[derive(Parser, Debug)]
#[command(name = "lava", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit one estimator at given penalties and write its coefficients.
    Fit(FitArgs),
    /// Choose penalties by SURE or cross-validation over a grid.
    Tune(TuneArgs),
    /// Exact risks in the Gaussian sequence model across dense-signal sizes.
    RiskCurve(RiskCurveArgs),
    /// Run a seeded regression or sequence simulation.
    Simulate(SimulateArgs),
    /// Report the ingredients of the prediction-error deviation bound.
    Bounds(BoundsArgs),
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// CSV with a header; response first, regressors after.
    pub data: PathBuf,
    /// Use the regressors as given instead of scaling columns to unit mean square.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "lava", value_parser = parse_estimator)]
    pub estimator: EstimatorKind,
    /// l1 level; `inf` allowed. Defaults to 1.1 times the simulated 95% score quantile.
    #[arg(long, value_parser = parse_penalty)]
    pub lambda1: Option<Penalty>,
    /// Ridge level; `inf` allowed. Required by lava, post-lava, ridge and elastic net.
    #[arg(long, value_parser = parse_penalty)]
    pub lambda2: Option<Penalty>,
    /// Noise variance; enables the SURE line of the summary.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Coefficient CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional CSV of fitted values and residuals.
    #[arg(long)]
    pub fitted: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Seed for the default-λ₁ score simulation.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub quantile_reps: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TuneMethodArg {
    Sure,
    Cv,
}

impl fmt::Display for TuneMethodArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TuneMethodArg::Sure => "sure",
            TuneMethodArg::Cv => "cv",
        })
    }
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "lava", value_parser = parse_estimator)]
    pub estimator: EstimatorKind,
    #[arg(long, value_enum, default_value_t = TuneMethodArg::Sure)]
    pub method: TuneMethodArg,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// `lambda1=LO:HI:N;lambda2=LO:HI:N`, log-spaced; omitted axes use the default grid.
    #[arg(long)]
    pub grid_spec: Option<String>,
    /// Noise variance; estimated by iterated lasso when absent.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Criterion surface CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional coefficient CSV of the refit at the chosen penalties.
    #[arg(long)]
    pub coef: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RiskCurveArgs {
    /// Comma-separated `key=value` among p, sigma, c, grid_lambda1, grid_lambda2.
    #[arg(long, default_value = "")]
    pub model_spec: String,
    /// `oracle` or `plugin`.
    #[arg(long, default_value = "oracle")]
    pub penalty_policy: String,
    /// `a,b,c` or `lo:hi:step`.
    #[arg(long)]
    pub q_grid: Option<String>,
    /// Comma-separated estimator names.
    #[arg(long)]
    pub estimators: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Plain-text `key = value` configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub lambda2: f64,
    /// Candidate dense part, one value per regressor.
    #[arg(long)]
    pub beta0: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Draws for the score quantile.
    #[arg(long, default_value_t = 2000)]
    pub reps: usize,
    /// Noise standard deviation; estimated by iterated lasso when absent.
    #[arg(long)]
    pub sigma_u: Option<f64>,
    /// Multiplier on the score quantile for λ₁ and the cone constant.
    #[arg(long, default_value_t = 1.1)]
    pub c: f64,
    /// Comma-separated support of the sparse part; adds the restricted-eigenvalue terms.
    #[arg(long)]
    pub support: Option<String>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_estimator(s: &str) -> Result<EstimatorKind, String> {
    s.parse().map_err(|e: lava_core::LavaError| e.to_string())
}

fn parse_penalty(s: &str) -> Result<Penalty, String> {
    s.parse().map_err(|e: lava_core::LavaError| e.to_string())
}
