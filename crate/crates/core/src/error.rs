use thiserror::Error;

/// Errors raised by the belief, teacher and selection primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VoiError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("rationality must be finite and non-negative, got {0}")]
    InvalidRationality(f64),

    #[error("posterior has no mass left to normalize")]
    DegenerateBelief,

    #[error("true weight lies in a zero-mass cell (index {cell}); log loss is unbounded")]
    OutOfSupport { cell: usize },

    #[error("belief masses must be finite, non-negative and sum to a positive value")]
    InvalidMasses,

    #[error("teacher pool is empty")]
    EmptyPool,

    #[error("teacher pool has no entry within 1e-9 of beta = 1")]
    NoUnitRationalityTeacher,

    #[error("invalid loop configuration: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T> = core::result::Result<T, VoiError>;
