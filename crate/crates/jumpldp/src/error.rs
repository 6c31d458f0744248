//! Crate-wide error type.
//!
//! Errors split into two families that the CLI maps to distinct exit codes:
//! input/validation problems (bad model files, malformed paths, domain
//! violations) and numeric failures (non-convergence, explosion guards,
//! overflow). [`Error::is_usage`] reports the family.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Model document rejected (JSON syntax or semantic validation).
    #[error("model error: {0}")]
    Model(String),

    /// Rate expression rejected; `line`/`column` locate the offending token
    /// within the formula string (1-based).
    #[error("expression error at {line}:{column}: {message}")]
    Expr {
        line: usize,
        column: usize,
        message: String,
    },

    /// Invalid argument or inconsistent input data.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Path or table file malformed.
    #[error("path format error: {0}")]
    PathFormat(String),

    /// Cover file or cover geometry rejected.
    #[error("cover error: {0}")]
    Cover(String),

    /// A rate evaluation left its domain (NaN, negative beyond tolerance, or
    /// infinite).
    #[error("rate domain error: reaction {reaction} at x={state:?}: {message}")]
    RateDomain {
        reaction: usize,
        state: Vec<f64>,
        message: String,
    },

    /// An iterative solver failed to converge within its cap.
    #[error("non-convergence: {0}")]
    NonConvergence(String),

    /// Other numeric failure (overflow guard, blow-up detection, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Stochastic simulation exceeded the explosion guard.
    #[error("jump cap exceeded: {jumps} jumps by t={t}")]
    JumpCapExceeded { jumps: usize, t: f64 },

    /// I/O failure (message carries the underlying error).
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for input/validation errors (CLI exit 2); false for numeric
    /// failures (CLI exit 3).
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Model(_)
            | Error::Expr { .. }
            | Error::Invalid(_)
            | Error::PathFormat(_)
            | Error::Cover(_)
            | Error::RateDomain { .. }
            | Error::Io(_) => true,
            Error::NonConvergence(_) | Error::Numeric(_) | Error::JumpCapExceeded { .. } => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
