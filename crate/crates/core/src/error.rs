//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by field evaluation, geometric construction and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("singular matrix at point {point:?} (|det| = {det:e})")]
    Singular { point: Vec<f64>, det: f64 },

    #[error("non-finite value in component {component} at point {point:?}")]
    NonFinite { component: usize, point: Vec<f64> },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported signature: {0}")]
    Signature(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
