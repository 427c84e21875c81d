//! File formats, multi-threaded sampling and training, and the command-line
//! pipeline built on `biasedwalk-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod parallel;
pub mod pipeline;

pub use biasedwalk_core as core;
pub use error::{Error, Result};
