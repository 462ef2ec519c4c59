//! Crate-wide error type and the exit-code convention used by the CLI.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch between shapes {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("{0}")]
    Domain(String),

    #[error("sequence of length {len} is shorter than the filter width {width}; pad it first")]
    SequenceTooShort { len: usize, width: usize },

    #[error("token at position {position} has id {id}, outside the vocabulary of size {vocab}")]
    TokenIdOutOfRange {
        position: usize,
        id: usize,
        vocab: usize,
    },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("numeric failure in {context}: {message}")]
    Numeric { context: String, message: String },

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error("checkpoint integrity error: {0}")]
    Integrity(String),

    #[error("operation `{what}` is not supported by the {variant} variant")]
    UnsupportedVariant {
        variant: &'static str,
        what: &'static str,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("validation failure: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code contract: 0 success, 1 usage/config, 2 I/O, 3 numeric/validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => 1,
            Error::Io { .. } => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
