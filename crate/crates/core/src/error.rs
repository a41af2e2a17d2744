use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the keyword extraction and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate doc_id \"{0}\"")]
    DuplicateDocument(String),

    #[error("invalid document \"{doc_id}\": {message}")]
    InvalidDocument { doc_id: String, message: String },

    #[error("parse error at offset {offset}: {message}")]
    Ptb { offset: usize, message: String },

    #[error("empty position multiset for stem")]
    EmptyPositions,

    #[error("unknown document \"{0}\"")]
    UnknownDocument(String),

    #[error("topic \"{0}\" has no relevance judgments")]
    NoRelevant(String),

    #[error("paired lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad arguments or configuration rather than bad data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
