use thiserror::Error;

/// Errors raised by sampling operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Item weight outside `(0, inf)`.
    #[error("weight must be positive and finite, got {0}")]
    InvalidWeight(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was called on a latent sample that does not satisfy its
    /// precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Structural invariant of a latent sample is broken.
    #[error("malformed latent sample: {0}")]
    Malformed(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    /// Exhaustive enumeration exceeded its configured limits.
    #[error("branch space too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
