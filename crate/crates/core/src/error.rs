use std::path::PathBuf;

use crate::inventory::SenseId;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("hypernym cycle through {0}")]
    Cycle(SenseId),

    #[error("unknown sense {0}")]
    UnknownSense(SenseId),

    #[error("unknown word {lemma}.{pos}")]
    UnknownWord { lemma: String, pos: String },

    #[error("no ball for sense {0}")]
    MissingBall(SenseId),

    #[error("ball construction failed: {0}")]
    Construction(String),

    #[error("empty candidate set")]
    NoCandidates,

    #[error("prediction for unknown instance {0}")]
    UnknownInstance(String),

    #[error("duplicate prediction for instance {0}")]
    DuplicateInstance(String),

    #[error("no training records")]
    NoRecords,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing dataset {0}")]
    MissingDataset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
