use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("semiclassical parameter mismatch: {left} vs {right}")]
    HbarMismatch { left: f64, right: f64 },

    #[error("coordinate {coordinate} out of range for dimension {dim}")]
    CoordinateOutOfRange { coordinate: usize, dim: usize },

    #[error("matrix of size {0} is not even-dimensional")]
    OddDimension(usize),

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not ortho-symplectic within tolerance {tol:e}")]
    NotOrthoSymplectic { tol: f64 },

    #[error("zero vector has no orbit or annihilator")]
    ZeroVector,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
