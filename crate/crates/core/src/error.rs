use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    RawIo(#[from] io::Error),

    /// A malformed line in a text file; `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A malformed or missing header field in a persisted model or table.
    #[error("bad field `{field}`: {message}")]
    Field { field: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty vocabulary after filtering with min_count {min_count}")]
    EmptyVocabulary { min_count: u64 },

    #[error("token `{0}` is not in the vocabulary")]
    OutOfVocabulary(String),

    #[error("character `{0}` has no entry in the character table")]
    UnknownCharacter(char),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("class `{0}` has no training examples")]
    MissingClass(String),

    #[error("no prediction for system `{0}`")]
    MissingSystem(String),

    #[error("zero-norm query vector for `{0}`")]
    ZeroNorm(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Field {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
