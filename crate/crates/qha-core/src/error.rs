//! Error type shared across the crate.

use thiserror::Error;

/// Errors reported by grid construction, transforms, and numerical routines.
#[derive(Debug, Error)]
pub enum QhaError {
    /// Construction parameters outside the supported range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two objects built over different phase-space grids were combined.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A matrix inverse was requested for an ill-conditioned operator.
    #[error("operator is numerically singular (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    /// File input/output failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A file had the right extension but unparseable content.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, QhaError>;
