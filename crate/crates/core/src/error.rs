//! Error types shared across the toolkit.

use thiserror::Error;

/// Toolkit-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// Input bytes are not valid UTF-8.
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },

    /// Inputs violate a file-level contract (line counts, missing data).
    #[error("format error: {0}")]
    Format(String),

    /// A function argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A triple record violates its structural invariants.
    #[error("inconsistent triple record: {0}")]
    InvalidRecord(String),

    /// An error model cannot be used as requested.
    #[error("model error: {0}")]
    Model(String),

    /// Parallel corpora contain no differing material to estimate from.
    #[error("no error signal in corpus")]
    NoErrorSignal,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
