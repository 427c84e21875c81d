//! Downstream evaluation: multilabel node classification and link prediction.

pub mod linear;
pub mod metrics;
pub mod protocol;
pub mod split;
pub mod sweep;

use alloc::string::String;

use crate::graph::GraphError;

pub use linear::{train_linear, LinearConfig, LogisticRegression, Matrix};
pub use metrics::{f1_scores, macro_f1, micro_f1, predict_multilabel, F1Scores};
pub use protocol::{hadamard, EvalConfig, LabeledDataset};
pub use split::{split_edges_for_linkpred, LinkPredSplit};
pub use sweep::{GridPoint, ParamGrid, SweepReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("insufficient removable edges: {requested} requested, {available} removable without disconnecting the graph")]
    InsufficientRemovableEdges { requested: usize, available: usize },
    #[error("insufficient non-edges: {requested} negative pairs requested, {available} exist")]
    InsufficientNonEdges { requested: usize, available: usize },
    #[error("graph must be connected")]
    Disconnected,
    #[error("node {0:?} has no embedding")]
    UnknownNode(String),
    #[error("asked for {k} labels but only {universe} exist")]
    TooManyLabels { k: usize, universe: usize },
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Graph(#[from] GraphError),
}
