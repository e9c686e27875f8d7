use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("matrix is not positive semidefinite: pivot {pivot:e} at index {index}")]
    NotPsd { index: usize, pivot: f64 },

    #[error("matrix is singular or indefinite: pivot {pivot:e} at index {index}")]
    Singular { index: usize, pivot: f64 },

    #[error(
        "kernel sections over the point set are not linearly independent \
         (Gram eigenvalues range from {min_eigenvalue:e} to {max_eigenvalue:e})"
    )]
    LinearlyDependent {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("kernel domain error: {0}")]
    Domain(String),

    #[error("kernel mismatch: elements belong to different kernels")]
    KernelMismatch,

    #[error("columns are not orthonormal (max deviation {defect:e})")]
    NotOrthonormal { defect: f64 },

    #[error("matrix {index} is not an orthogonal projection (defect {defect:e})")]
    NotProjection { index: usize, defect: f64 },

    #[error("row {row} of the system matrix is zero")]
    ZeroRow { row: usize },

    #[error("kernel is not stationary with unit diagonal: {0}")]
    NotStationary(String),

    #[error("frame precondition failed: sum of <Q_n u, Q_n v> misses <u, v> by {defect:e}")]
    ParsevalDefect { defect: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported PGM depth: maxval {0} exceeds 255")]
    UnsupportedDepth(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NotSymmetric { .. }
                | Error::NonFinite { .. }
                | Error::Domain(_)
                | Error::KernelMismatch
                | Error::ZeroRow { .. }
                | Error::InvalidArgument(_)
                | Error::Format(_)
                | Error::UnsupportedDepth(_)
                | Error::Io(_)
        )
    }
}
