use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The starting point has `h(x0) = +inf`.
    #[error("initial point is outside the effective domain of h")]
    InvalidStart,

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Certificates need `k >= 1` (x̃_{k-1} and A_k > 0).
    #[error("certificate is undefined at k = 0")]
    UndefinedCertificate,

    #[error("accumulated coefficient overflowed (A = {0:e})")]
    GrowthOverflow(f64),

    #[error("iteration bound unavailable: {0}")]
    UnsupportedBound(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("malformed instance file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
