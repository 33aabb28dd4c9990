use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum UrError {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("Hermiticity defect {defect:e} exceeds tolerance {tol:e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator/state basis mismatch")]
    BasisMismatch,

    #[error("minor index out of range or not strictly increasing: {0:?}")]
    BadMinorIndex(Vec<usize>),

    #[error("order {r} out of range for dimension {n}")]
    BadOrder { r: usize, n: usize },

    #[error("state failed normalization check (defect {0:e})")]
    NotNormalized(f64),

    #[error("truncation tail {occupancy:e} exceeds tolerance {tol:e}")]
    TailGate { occupancy: f64, tol: f64 },

    #[error("mean of a Hermitian observable has imaginary residue {0:e}")]
    ImaginaryResidue(f64),

    #[error("linear map is singular (|det| = {0:e})")]
    SingularMap(f64),

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, UrError>;
