use std::path::PathBuf;

use biasedwalk_core::eval::sweep::DEFAULT_ALPHAS;
use biasedwalk_core::{TrainConfig, WalkConfig, WalkType};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "biasedwalk", version, about = "Proximity-biased random walk node embeddings")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize, PartialEq)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Sample walks and train embeddings.
    Embed(EmbedArgs),
    /// Sample walks and write them as a text corpus.
    Walks(WalksArgs),
    /// Node classification scores against the fraction of labelled nodes.
    Nodeclass(NodeclassArgs),
    /// Link prediction on held-out edges.
    Linkpred(LinkpredArgs),
    /// Cross-validated search over walk type and alpha.
    Sweep(SweepArgs),
    /// Timing on random graphs of growing size.
    Bench(BenchArgs),
    /// Keep only the largest (strongly) connected component.
    Lcc(LccArgs),
    /// Write a random graph with a given average degree.
    Generate(GenerateArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Embed(_) => "embed",
            Command::Walks(_) => "walks",
            Command::Nodeclass(_) => "nodeclass",
            Command::Linkpred(_) => "linkpred",
            Command::Sweep(_) => "sweep",
            Command::Bench(_) => "bench",
            Command::Lcc(_) => "lcc",
            Command::Generate(_) => "generate",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bfs,
    Dfs,
    Uniform,
}

impl From<Mode> for WalkType {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Bfs => WalkType::Bfs,
            Mode::Dfs => WalkType::Dfs,
            Mode::Uniform => WalkType::Uniform,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct GraphArgs {
    /// Edge list: "src dst [weight]" per line, '#' starts a comment.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub directed: bool,
    /// Use edge weights during sampling.
    #[arg(long)]
    pub weighted: bool,
}

#[derive(Debug, Clone, Copy, Args, Serialize, Deserialize, PartialEq)]
pub struct BiasArgs {
    #[arg(long, value_enum, default_value = "dfs")]
    pub walk_type: Mode,
    /// Proximity decay in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, Args, Serialize, Deserialize, PartialEq)]
pub struct ShapeArgs {
    /// Walks started from every node.
    #[arg(long, default_value_t = 10)]
    pub num_walks: usize,
    /// Maximum number of nodes per walk.
    #[arg(long, default_value_t = 80)]
    pub walk_length: usize,
}

#[derive(Debug, Clone, Copy, Args, Serialize, Deserialize, PartialEq)]
pub struct TrainArgs {
    /// Context window on each side of a node.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    /// Noise samples per pair; 0 trains with the full softmax.
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to --final-lr.
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.0001)]
    pub final_lr: f64,
}

#[derive(Debug, Clone, Copy, Args, Serialize, Deserialize, PartialEq)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to the available cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Single-worker training with a fixed update order.
    #[arg(long)]
    pub deterministic: bool,
}

impl RunArgs {
    pub fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
            .max(1)
    }
}

#[derive(Debug, Clone, Copy, Args, Serialize, Deserialize, PartialEq)]
pub struct ClassifierArgs {
    /// L2 penalty of the logistic regressions (default 1 / training rows).
    #[arg(long)]
    pub l2: Option<f64>,
    /// Scale features to zero mean and unit variance using training rows.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

pub fn walk_config(bias: &BiasArgs, shape: &ShapeArgs, run: &RunArgs) -> WalkConfig {
    WalkConfig { walk_type: bias.walk_type.into(), alpha: bias.alpha, max_length: shape.walk_length, seed: run.seed }
}

pub fn train_config(t: &TrainArgs, run: &RunArgs) -> TrainConfig {
    TrainConfig {
        dim: t.dim,
        window: t.window,
        negatives: t.negatives,
        epochs: t.epochs,
        initial_lr: t.lr,
        final_lr: t.final_lr,
        seed: run.seed,
        deterministic: run.deterministic,
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub bias: BiasArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Embedding file to write.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct WalksArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub bias: BiasArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Corpus file to write.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct NodeclassArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub bias: BiasArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    /// Label file: "node<TAB>label,label,..." per line.
    #[arg(long)]
    pub labels: PathBuf,
    /// Use these embeddings instead of training new ones.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Fractions of labelled nodes used for training.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])]
    pub fractions: Vec<f64>,
    /// Random splits per fraction.
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    /// Score table (CSV).
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct LinkpredArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub bias: BiasArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    /// Fraction of edges held out as positive pairs.
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    /// Fraction of labelled pairs used to train the classifier.
    #[arg(long, default_value_t = 0.5)]
    pub train_fraction: f64,
    /// Independent splits, each with its own embedding.
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    /// Directory for split files, scores and the manifest.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Nodeclass,
    Linkpred,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct SweepArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[arg(long, value_enum, default_value = "nodeclass")]
    pub task: Task,
    /// Label file, required for node classification.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Mode::Bfs, Mode::Dfs])]
    pub walk_types: Vec<Mode>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ALPHAS)]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Held-out edge fraction for link prediction.
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    /// Per-cell score table (CSV).
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct BenchArgs {
    /// Graph sizes to time.
    #[arg(long, value_delimiter = ',', default_values_t = [1000, 10000, 100000])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 10.0)]
    pub degree: f64,
    #[command(flatten)]
    pub bias: BiasArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Timing table (CSV).
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct LccArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct GenerateArgs {
    #[arg(long)]
    pub nodes: usize,
    #[arg(long, default_value_t = 10.0)]
    pub degree: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
}
