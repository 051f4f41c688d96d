use thiserror::Error;

/// Errors produced by the numeric kernel and the criteria built on it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix has zero dimension")]
    EmptyMatrix,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric: deviation {deviation:e} exceeds {tolerance:e}")]
    Asymmetric { deviation: f64, tolerance: f64 },

    #[error("matrix is not antisymmetric: deviation {deviation:e} exceeds {tolerance:e}")]
    NotAntisymmetric { deviation: f64, tolerance: f64 },

    #[error("invalid index set: {0}")]
    InvalidIndices(String),

    #[error("singular pivot block: smallest |eigenvalue| {min_abs:e} below {threshold:e}")]
    SingularPivot { min_abs: f64, threshold: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eig:e}")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("unphysical covariance matrix: uncertainty margin {margin:e}")]
    Unphysical { margin: f64 },

    #[error("symplectic spectrum could not be paired: {0}")]
    Pairing(String),

    #[error("matrix is not symplectic: residual {residual:e}")]
    NotSymplectic { residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("channel is not completely positive: margin {margin:e}")]
    NotCompletelyPositive { margin: f64 },

    #[error("outside the scope of the monogamy relation: {0}")]
    OutOfScope(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("state file: {0}")]
    StateFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(csv::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            if let csv::ErrorKind::Io(io) = e.into_kind() {
                return Error::Io(io);
            }
            unreachable!("is_io_error implies an io kind");
        }
        Error::Csv(e)
    }
}

impl Error {
    /// True for errors that signal a broken invariant rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::InvariantViolation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
