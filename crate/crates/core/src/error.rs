use thiserror::Error;

/// Errors raised by the estimation pipeline and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-positive diagonal entry {value} at index {index}")]
    NonPositiveDiagonal { index: usize, value: f64 },

    #[error("non-positive variance {value} at index {index}")]
    NonPositiveVariance { index: usize, value: f64 },

    #[error("measurement variance must be positive, got {0}")]
    NonPositiveMeasurementVariance(f64),

    #[error("predicted state covariance is singular at t = {t}")]
    SingularPrediction { t: usize },

    #[error("kalman filter failed at t = {t}: {source}")]
    KalmanStep {
        t: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid GARCH parameters: {0}")]
    InvalidParameters(String),

    #[error("series too short: need at least {min} observations, got {len}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("series has zero variance")]
    DegenerateSeries,

    #[error("optimizer did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("panel: {0}")]
    InvalidPanel(String),

    #[error("{stage} failed for series {index}: {source}")]
    Pipeline {
        stage: &'static str,
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{count} permutations exceed the exhaustive limit of {limit} variables")]
    TooManyPermutations { count: usize, limit: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("block size {q} exceeds series length {n}")]
    BlockTooLarge { q: usize, n: usize },

    #[error("block size {q} is too small or even (need odd q >= 3)")]
    BlockTooSmall { q: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
}

impl Error {
    pub(crate) fn pipeline(stage: &'static str, index: usize, source: Error) -> Self {
        Error::Pipeline {
            stage,
            index,
            source: Box::new(source),
        }
    }

    /// True for failures caused by malformed input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::InvalidPanel(_)
            | Error::InvalidArgument(_)
            | Error::InvalidPermutation(_)
            | Error::BlockTooLarge { .. }
            | Error::BlockTooSmall { .. }
            | Error::DimensionMismatch(_)
            | Error::TooManyPermutations { .. }
            | Error::SeriesTooShort { .. } => true,
            Error::Pipeline { source, .. } | Error::KalmanStep { source, .. } => {
                source.is_input_error()
            }
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
