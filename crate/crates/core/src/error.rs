//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not skew-Hermitian (defect {0:.3e})")]
    NotSkewHermitian(f64),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not traceless (|tr| = {0:.3e})")]
    NotTraceless(f64),
    #[error("matrix is not positive-definite (smallest eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("invalid grid size: {0}")]
    InvalidSize(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("boundary condition violated: {0}")]
    BoundaryViolation(String),
    #[error("alpha is not constant (deviation {0:.3e})")]
    NonConstantAlpha(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("FI parameters incompatible with this family: {0}")]
    XiMismatch(String),
    #[error("axial class is ambiguous: {0}")]
    Degenerate(String),
    #[error("input is unstable for the chosen real FI parameters")]
    UnstableInput,
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("singular-value gap at the cut is too small (ratio {0:.3e})")]
    IllConditioned(f64),
    #[error("data is reducible (constrained Laplacian is singular)")]
    Reducible,
    #[error("data is not irreducible")]
    NotIrreducible,
    #[error("expected a {expected}-dimensional kernel, found {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("path enters the non-generic tube at step {0}")]
    PathHitsWall(usize),
    #[error("real FI parameters do not weakly share signs")]
    SignConditionViolated,
    #[error("{0} sphere points failed to converge")]
    NonConvergedPoints(usize),
    #[error("group acts with non-isolated fixed points (det(γ - 1) = 0)")]
    NonIsolatedAction,
    #[error("operators fail to commute (defect {0:.3e})")]
    NonCommuting(f64),
    #[error("linear system is singular")]
    Singular,
}
