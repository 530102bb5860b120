use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification of an [`Error`], used by the command-line tool to
/// pick an exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numeric,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 2,
            ErrorKind::Numeric => 3,
            ErrorKind::Io => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Numeric => "numeric",
            ErrorKind::Io => "io",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("response entry {index} is {value}, expected 0 or 1")]
    InvalidResponseValue { index: usize, value: f64 },
    #[error("Cholesky factorization failed: {0} is not positive definite")]
    CholeskyFailure(&'static str),
    #[error("{0} is not symmetric")]
    NotSymmetric(&'static str),
    #[error("design matrix is column-rank deficient (rank {rank} < p = {p})")]
    RankDeficient { rank: usize, p: usize },
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("matrix is identically zero")]
    ZeroMatrix,
    #[error("tau must be positive, got {0}")]
    InvalidTau(f64),
    #[error("operation requires a proper normal or g-prior")]
    ImproperPriorUnsupported,
    #[error("design matrix is identically zero")]
    ZeroDesign,
    #[error("latent vector is identically zero")]
    ZeroLatent,
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("A must be positive, got {0}")]
    NonpositiveA(f64),
    #[error("g-step rejection sampler stalled after {0} consecutive rejections")]
    GStepStalled(u64),
    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("series is constant")]
    ConstantSeries,
    #[error("series too short: length {len}, need at least {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("quadrature oracle supports p <= 2, got p = {0}")]
    DimensionTooLarge(usize),
    #[error("posterior is improper under the flat prior")]
    ImproperPosterior,
    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: row {row}: response must be 0 or 1, got {value:?}")]
    InvalidResponse {
        path: PathBuf,
        row: usize,
        value: String,
    },
    #[error("{0}: file has no data rows")]
    EmptyFile(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::CholeskyFailure(_)
            | Error::ZeroLatent
            | Error::NonpositiveA(_)
            | Error::GStepStalled(_)
            | Error::NonFinite(_)
            | Error::ConstantSeries => ErrorKind::Numeric,
            Error::Io { .. } => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
