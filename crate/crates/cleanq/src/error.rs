//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {dim} exceeds the configured cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("matrix entries must be finite")]
    NonFiniteEntry,

    #[error("matrix is not Hermitian: max deviation {dev:.3e} exceeds {tol:.1e}")]
    NotHermitian { dev: f64, tol: f64 },

    #[error("matrix is not unitary: max deviation {dev:.3e} exceeds {tol:.1e}")]
    NotUnitary { dev: f64, tol: f64 },

    #[error("not a valid density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("state is not pure (purity {0})")]
    NotPure(f64),

    #[error("invalid register layout: {0}")]
    InvalidLayout(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigendecomposition did not converge after {0} sweeps")]
    EigenConvergence(usize),

    #[error("internal consistency check failed: {0}")]
    ConsistencyFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
