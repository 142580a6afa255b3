//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A trace does not contain a resolvable peak (no half-maximum
    /// crossing on one or both sides of the maximum).
    #[error("peak not resolved: {0}")]
    PeakNotResolved(String),

    /// An internal identity that must hold by construction failed,
    /// which indicates a transcription bug rather than bad input.
    #[error("internal consistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
