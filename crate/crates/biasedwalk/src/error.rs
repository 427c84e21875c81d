use std::fmt;
use std::path::{Path, PathBuf};

use biasedwalk_core::corpus::CorpusError;
use biasedwalk_core::eval::EvalError;
use biasedwalk_core::skipgram::{ModelError, TrainError};
use biasedwalk_core::walker::WalkError;
use biasedwalk_core::GraphError;
use thiserror::Error;

/// Malformed input, located by file (when known) and 1-based line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub file: Option<PathBuf>,
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { file: None, line, message: message.into() }
    }

    pub fn in_file(mut self, path: &Path) -> Self {
        self.file = Some(path.to_path_buf());
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.file {
            Some(p) => write!(f, "{}:{}: {}", p.display(), self.line, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Parameter(String),
    #[error("{0}")]
    Runtime(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn parameter(msg: impl fmt::Display) -> Self {
        Error::Parameter(msg.to_string())
    }

    /// Process exit status: 1 runtime or I/O, 3 parse, 4 parameter.
    /// Command-line usage errors exit with 2 before any command runs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Runtime(_) => 1,
            Error::Parse(_) => 3,
            Error::Parameter(_) => 4,
        }
    }
}

impl From<GraphError> for Error {
    fn from(e: GraphError) -> Self {
        Error::Parameter(e.to_string())
    }
}

impl From<WalkError> for Error {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::DeadEnd(_) | WalkError::InvalidProximity { .. } | WalkError::Corpus(_) => Error::Runtime(e.to_string()),
            _ => Error::Parameter(e.to_string()),
        }
    }
}

impl From<TrainError> for Error {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::InvalidConfig(_) => Error::Parameter(e.to_string()),
            _ => Error::Runtime(e.to_string()),
        }
    }
}

impl From<EvalError> for Error {
    fn from(e: EvalError) -> Self {
        Error::Parameter(e.to_string())
    }
}

impl From<CorpusError> for Error {
    fn from(e: CorpusError) -> Self {
        Error::Runtime(e.to_string())
    }
}

impl From<ModelError> for Error {
    fn from(e: ModelError) -> Self {
        Error::Runtime(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
