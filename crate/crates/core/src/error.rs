//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by the CDI pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying I/O failure while reading or writing artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A persisted file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A persisted file violates the schema (version, counts, non-finite data).
    #[error("schema error: {0}")]
    Schema(String),

    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A query point lies outside the domain beyond the clamp tolerance.
    #[error("point {point:?} outside domain by {excess:.3e}")]
    OutsideDomain { point: Vec<f64>, excess: f64 },

    /// A linear solve, factorization, or iteration failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Registration toward one neighbor failed during online assembly.
    #[error("registration toward neighbor {neighbor} failed: {source}")]
    Registration {
        neighbor: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }
}
