use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "wunt", version, about = "ATT estimation by weighting with a uniform transformer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub config: ConfigArgs,

    /// Worker threads; results are identical for any value [default: available cores]
    #[arg(long, global = true, env = "WUNT_THREADS")]
    pub threads: Option<usize>,

    /// Output format for reports and tables
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Print errors as a JSON object on stderr
    #[arg(long, global = true)]
    pub error_json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

/// Estimator configuration. Precedence: built-in defaults, then `--config`, then these flags.
#[derive(Debug, Clone, Default, Args)]
#[command(next_help_heading = "Estimator configuration")]
pub struct ConfigArgs {
    /// JSON file with any of the keys below; unknown keys are rejected
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Kernel order, one of 2, 4, 6 [default: 2]
    #[arg(long = "kernel.order", global = true, value_name = "ORDER")]
    pub kernel_order: Option<u8>,

    /// Bandwidth, scalar or comma-separated per dimension [default: c·n^(-2/(d+2(α+β)))]
    #[arg(long = "kernel.bandwidth", global = true, value_name = "H")]
    pub kernel_bandwidth: Option<String>,

    /// Projection basis family, cosine or haar [default: cosine]
    #[arg(long = "basis.family", global = true, value_name = "FAMILY")]
    pub basis_family: Option<String>,

    /// Number of basis functions [default: max(1, round(c·n^(2d/(d+2(α+β)))))]
    #[arg(long = "basis.count", global = true, value_name = "L")]
    pub basis_count: Option<usize>,

    /// Smoothness of the control response surface [default: 1]
    #[arg(long = "smoothness.alpha", global = true, value_name = "ALPHA")]
    pub alpha: Option<f64>,

    /// Smoothness of the treated density [default: 1]
    #[arg(long = "smoothness.beta", global = true, value_name = "BETA")]
    pub beta: Option<f64>,

    /// Constant in the tuning rules [default: 1]
    #[arg(long = "scale.c", global = true, value_name = "C")]
    pub scale_c: Option<f64>,

    /// Sample size entering the tuning rules: total, control or treated [default: total]
    #[arg(long = "sample-size", global = true, value_name = "RULE")]
    pub sample_size: Option<String>,

    /// Margin of the rescale onto [ε, 1-ε]^d [default: 0.01]
    #[arg(long = "margin", global = true, value_name = "EPS")]
    pub margin: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the ATT from a CSV file
    Estimate(EstimateArgs),
    /// Apply a uniform transformer to a CSV file
    Transform(TransformArgs),
    /// Bias and RMSE over simulated replications
    Simulate(SimulateArgs),
    /// Wall time against sample size on the Y3 design
    Bench(BenchArgs),
    /// MSE against bandwidth in the one-dimensional warm-up design
    DemoWarmup(WarmupArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input CSV with a header row
    #[arg(long, short)]
    pub input: PathBuf,

    /// Treatment column (values 0/1)
    #[arg(long, default_value = "Z")]
    pub treatment: String,

    /// Comma-separated covariate columns [default: every column except treatment and outcome]
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,

    /// Unlabeled control covariates (CSV with the same covariate columns)
    #[arg(long, value_name = "FILE")]
    pub pool: Option<PathBuf>,

    /// Uniform transformer: identity, joint, marginal, joint-extra, marginal-extra, plugin
    #[arg(long, default_value = "joint")]
    pub transformer: String,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Outcome column
    #[arg(long, default_value = "Y")]
    pub outcome: String,

    /// kernel, projection or ipw-logistic
    #[arg(long, default_value = "kernel")]
    pub estimator: String,

    /// Report destination [default: stdout]
    #[arg(long, short)]
    pub out: Option<PathBuf>,

    /// Write per-row weights (row, Z, w) to this CSV
    #[arg(long, value_name = "FILE")]
    pub weights: Option<PathBuf>,

    /// Clip negative weights to zero and renormalize in the weights file
    #[arg(long, requires = "weights")]
    pub clip: bool,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Outcome column carried through unchanged, if present
    #[arg(long, default_value = "Y")]
    pub outcome: String,

    /// Transformed CSV destination [default: stdout]
    #[arg(long, short)]
    pub out: Option<PathBuf>,

    /// Write the joint partition as JSON (joint transformers only)
    #[arg(long, value_name = "FILE")]
    pub partition: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// y1, y2, y3 or y4
    #[arg(long)]
    pub model: String,

    /// Covariate correlation for y1/y2
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,

    /// Labeled sample size; y1/y2 split it one third treated [default: 1500 for y1/y2, 1000 for y3/y4]
    #[arg(long)]
    pub n: Option<usize>,

    /// Unlabeled pool size for y1/y2 [default: 10000 when an estimator needs it, else 0]
    #[arg(long)]
    pub pool: Option<usize>,

    /// Replications
    #[arg(long, default_value_t = 100)]
    pub reps: usize,

    /// Base seed; replication r uses seed XOR r
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Comma-separated estimators, e.g. kernel+joint,projection+marginal,ipw
    #[arg(long, default_value = "kernel+joint,kernel+marginal,projection+joint,projection+marginal,ipw-logistic")]
    pub estimators: String,

    /// Table destination [default: stdout]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated ascending sample sizes
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,5000")]
    pub sizes: Vec<usize>,

    /// Timed runs per size
    #[arg(long, default_value_t = 10)]
    pub reps: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, default_value = "kernel+joint,kernel+marginal,projection+joint,projection+marginal")]
    pub estimators: String,

    /// Threads used while timing
    #[arg(long, default_value_t = 1)]
    pub bench_threads: usize,

    /// Table destination [default: stdout]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WarmupArgs {
    /// Total sample size, split evenly between groups
    #[arg(long, default_value_t = 4000)]
    pub n: usize,

    #[arg(long, default_value_t = 50)]
    pub reps: usize,

    /// rough or smooth
    #[arg(long, default_value = "rough")]
    pub response: String,

    /// Treated-density smoothness in the reference rule n^(-1/(1+2β))
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,

    /// Comma-separated bandwidths [default: 10 log-spaced values from 1/n to 0.5]
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,

    #[arg(long, default_value_t = 20_240_101)]
    pub seed: u64,

    /// Table destination [default: stdout]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
