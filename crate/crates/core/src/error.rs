use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Cholesky or LU factorization failed (singular or not positive definite).
    #[error("factorization failed: {0}")]
    Factorization(String),

    /// Sample scatter is singular, so a location/scatter based quantity is undefined.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// A projected scale estimate vanished.
    #[error("zero projected scale along direction {direction:?}")]
    DegenerateScale { direction: Vec<f64> },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    /// The Oja rank covariance matrix is singular.
    #[error("degenerate rank covariance: {0}")]
    DegenerateRank(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    /// A Monte Carlo replication failed.
    #[error("replication {index}: {source}")]
    Replication {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures caused by degenerate data (singular matrices, zero scales).
    pub fn is_degeneracy(&self) -> bool {
        match self {
            Error::Factorization(_)
            | Error::DegenerateSample(_)
            | Error::DegenerateScale { .. }
            | Error::DegenerateVariance(_)
            | Error::DegenerateRank(_)
            | Error::Numeric(_) => true,
            Error::Replication { source, .. } => source.is_degeneracy(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
