use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("unknown category {0:?}")]
    UnknownCategory(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("unmapped categories: {}", .0.join(", "))]
    UnmappedCategories(Vec<String>),

    #[error("inconsistent instance: {0}")]
    Inconsistent(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("raw fitness not assigned for solution {0}")]
    MissingRawFitness(usize),

    #[error("repair failed on day {day}: {reason}")]
    RepairFailure { day: usize, reason: String },

    #[error("generation {generation}: {source}")]
    InGeneration {
        generation: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("run with seed {seed} failed: {source}")]
    InRun {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True when this error, or any error it wraps, is a repair failure.
    pub fn is_repair_failure(&self) -> bool {
        match self {
            Error::RepairFailure { .. } => true,
            Error::InGeneration { source, .. } | Error::InRun { source, .. } => {
                source.is_repair_failure()
            }
            _ => false,
        }
    }
}
