use thiserror::Error;

use crate::ellipsoid::MveeReport;

pub type Result<T> = std::result::Result<T, GeomError>;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("generator {index} is the zero vector")]
    ZeroGenerator { index: usize },

    #[error("generators do not span R^{n} (rank {rank})")]
    NotFullDimensional { n: usize, rank: usize },

    #[error("body is unbounded: facet functionals fail to span")]
    UnboundedBody,

    #[error("matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("direction is not a unit vector (norm {norm})")]
    InvalidDirection { norm: f64 },

    #[error("MVEE solver did not converge after {} iterations (epsilon {})", .0.iterations, .0.epsilon)]
    NoConvergence(Box<MveeReport>),

    #[error("map is not O(n)-equivariant on the slice (defect {defect:e} > {tol:e})")]
    NotEquivariantOnSlice { defect: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),
}
