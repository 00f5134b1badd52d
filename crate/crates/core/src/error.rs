use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix data has {len} entries, expected {dim}x{dim}")]
    Shape { dim: usize, len: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian: |A[{row}][{col}] - conj(A[{col}][{row}])| = {defect:e} exceeds {tolerance:e}")]
    NotHermitian {
        row: usize,
        col: usize,
        defect: f64,
        tolerance: f64,
    },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },

    #[error("imaginary residue {residue:e} in a quantity that must be real ({what})")]
    ImaginaryResidue { what: &'static str, residue: f64 },

    #[error("invalid spin system: {0}")]
    InvalidSystem(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("per-bond couplings must be uniform, got {0:?}")]
    NonUniformCoupling(Vec<f64>),
}
