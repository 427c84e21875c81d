//! Proximity-biased random walks for node representation learning.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the pure parts of
//! the pipeline:
//!
//! * [`graph`]: compressed adjacency storage, component extraction and
//!   synthetic generators.
//! * [`walker`]: BFS/DFS-style walks steered by accumulated proximity scores.
//! * [`corpus`] and [`skipgram`]: the walk corpus and a skip-gram trainer with
//!   negative sampling (plus a full-softmax reference path).
//! * [`eval`]: link-prediction splits, a one-vs-rest logistic regression,
//!   F1 metrics and the parameter sweep.
//!
//! File formats, threads and the command line live in the `biasedwalk` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod eval;
pub mod generate;
pub mod graph;
pub mod rng;
pub mod skipgram;
pub mod walker;

pub use corpus::Corpus;
pub use graph::{Graph, GraphBuilder, GraphError, Neighbor, NodeId};
pub use skipgram::{EmbeddingModel, TrainConfig};
pub use walker::{WalkConfig, WalkType};
