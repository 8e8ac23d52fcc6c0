use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The numerical variants (`RankDeficient`, `Singular`, `NoConvergence`) mark
/// degenerate draws; samplers catch them and resample.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is numerically rank deficient (pivot {pivot:.3e} at index {index})")]
    RankDeficient { index: usize, pivot: f64 },

    #[error("matrix is numerically singular (pivot {pivot:.3e} at index {index})")]
    Singular { index: usize, pivot: f64 },

    #[error("QR iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("moment index {index} out of range: {reason}")]
    OutOfRange { index: usize, reason: String },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("argument {value} outside domain {domain}")]
    DomainError { value: f64, domain: &'static str },

    #[error("degenerate draws exceeded retry budget ({retries} retries): {last}")]
    RetryBudgetExceeded { retries: u32, last: Box<Error> },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for measure-zero degenerate draws that warrant a resample.
    pub fn is_degenerate_draw(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::Singular { .. } | Error::NoConvergence { .. }
        )
    }

    /// Process exit status: 2 for usage, config and I/O problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Unsupported(_)
            | Error::OutOfRange { .. }
            | Error::DomainError { .. }
            | Error::DimensionMismatch(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
