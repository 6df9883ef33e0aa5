use std::path::PathBuf;

use thiserror::Error;

use crate::netstats::LogisticFit;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid {encoding} at byte offset {offset}")]
    Decode {
        path: PathBuf,
        encoding: &'static str,
        offset: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("manifest row {row} (id `{id}`): {message}")]
    Manifest {
        row: usize,
        id: String,
        message: String,
    },

    #[error("unknown node id {0}")]
    UnknownNode(u32),

    #[error("level count must be at least 1, got {0}")]
    InvalidLevel(usize),

    #[error("unsupported measurement `{0}`")]
    UnsupportedMeasurement(String),

    #[error("need at least {required} defined pairs, got {found}")]
    TooFewValues { required: usize, found: usize },

    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("correlation undefined: zero variance")]
    ZeroVariance,

    #[error("insufficient bins: {populated} populated, {required} required")]
    InsufficientBins { populated: usize, required: usize },

    #[error("fit did not converge after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        best: Box<LogisticFit>,
    },

    #[error("shared vocabulary is empty")]
    EmptyVocabulary,

    #[error("{0}")]
    InvalidInput(String),

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
