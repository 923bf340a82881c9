use thiserror::Error;

/// Errors raised while building or combining model objects.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state space: {0}")]
    InvalidSpace(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("target must be strictly positive (value {value} at point {index})")]
    NonPositiveTarget { index: usize, value: f64 },

    #[error("density is not normalized: total mass {mass} (tolerance {tolerance})")]
    NotNormalized { mass: f64, tolerance: f64 },

    #[error("cannot normalize: total mass {0} is zero or non-finite")]
    DegenerateMass(f64),

    #[error("objects live on different state spaces")]
    SpaceMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid proposal at row {row}: {reason}")]
    InvalidProposal { row: usize, reason: String },

    #[error("row {row} of the kernel does not close: residual {residual:e}")]
    RowClosure { row: usize, residual: f64 },

    #[error("kernel powers derive from different base kernels ({left} vs {right})")]
    MismatchedKernels { left: String, right: String },

    #[error(
        "positivity condition fails for nu = {nu}; eigenvalue 1 has multiplicity {multiplicity}"
    )]
    PositivityFails { nu: usize, multiplicity: usize },

    #[error("mismatched configuration: {0}")]
    MismatchedConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
