use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gmt", version, about = "Greedy-modal Bayesian decision trees")]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a tree (or distinct-root ensemble) and write the model file.
    Train(TrainArgs),
    /// Classify rows of a CSV file with a saved model. With `--verbose`
    /// each row also lists its decision path.
    Predict(PredictArgs),
    /// Accuracy of a saved model on a labelled file, or k-fold CV without one.
    Eval(EvalArgs),
    /// Run a benchmark suite described by a TOML file.
    Bench(BenchArgs),
    /// Render a saved model as text, structured JSON or a Graphviz graph.
    Export(ExportArgs),
    /// Posterior mass of splitting on each input column at the root.
    Importance(ImportanceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
    Graph,
}

/// Model hyper-parameters shared by the commands that build trees.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Root Dirichlet pseudo-count; repeat once per class (default 10 each).
    #[arg(long = "alpha", value_name = "A")]
    pub alpha: Vec<f64>,
    /// Base of the geometric partition prior.
    #[arg(long, default_value_t = 0.99)]
    pub g: f64,
    /// Use `g` instead of `g^(1+depth)` as the split mass at every depth.
    #[arg(long)]
    pub depth_independent_prior: bool,
    /// Give every partition of a node's space the same prior mass.
    #[arg(long, conflicts_with = "depth_independent_prior")]
    pub uniform_partition_prior: bool,
    /// Smoothing proportion: children start from prior + delta x counts.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Force leaves at this depth.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Ensemble size; 1 builds the single greedy-modal tree.
    #[arg(long, default_value_t = 1)]
    pub trees: usize,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file.
    #[arg(long)]
    pub data: PathBuf,
    /// TOML schema describing the CSV columns.
    #[arg(long)]
    pub schema: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Model file to write.
    #[arg(long, alias = "model")]
    pub out: PathBuf,
    /// Also print the tree in this format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: DataArgs,
    /// Write predictions here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: DataArgs,
    /// Score this model; without it, run k-fold cross-validation.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub hyper: ModelArgs,
    /// Fold count.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Shuffle seed; repeat for several repetitions.
    #[arg(long = "seed", default_value = "0")]
    pub seed: Vec<u64>,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write per-row held-out predictions (CSV) here.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Benchmark suite file.
    #[arg(long, alias = "data")]
    pub spec: PathBuf,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for per-dataset prediction CSVs.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Replace every dataset's shuffle seeds with these.
    #[arg(long = "seed")]
    pub seed: Vec<u64>,
    /// Replace every k-fold dataset's fold count.
    #[arg(long)]
    pub k: Option<usize>,
    /// Only run the named datasets.
    #[arg(long = "only")]
    pub only: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Also list every encoded dimension.
    #[arg(long)]
    pub per_dimension: bool,
}
