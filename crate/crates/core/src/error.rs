use thiserror::Error;

/// Errors raised by the simplex model, the mechanism and the accountant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a simplex vector: {0}")]
    InvalidVector(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("infeasible domain: {0}")]
    InfeasibleDomain(String),

    #[error("vector lies outside the restricted domain: {0}")]
    OutsideDomain(String),

    #[error("vectors are not adjacent: {0}")]
    NotAdjacent(String),

    #[error("density is unbounded at coordinate {index} (x = 0 with k*p < 1)")]
    UnboundedDensity { index: usize },

    #[error("calibration infeasible: {0}")]
    CalibrationInfeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("empty collection")]
    EmptyCollection,

    #[error("malformed input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
