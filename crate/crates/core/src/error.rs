use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite coefficient at index {0:?}")]
    NonFinite(Vec<i64>),

    #[error("potential has nonzero mean {0}; subtract mean first")]
    NonzeroMean(f64),

    #[error("potential is not coordinatewise even")]
    NotCoordinatewiseEven,

    #[error("potential period {potential} is incompatible with basis cell {basis}")]
    IncompatiblePeriod { potential: f64, basis: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("basis size {size} exceeds cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("spectrum carries no eigenvectors")]
    MissingEigenvectors,

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("truncation tail {tail:e} exceeds budget at t = {t}")]
    TailTooLarge { t: f64, tail: f64 },

    #[error("requested {requested} eigenvalues but only {available} are reliable")]
    CountTooLarge { requested: usize, available: usize },

    #[error("ill-conditioned fit (condition number {0:e})")]
    IllConditioned(f64),

    #[error("too few sample points: need {need}, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error("exponent sets differ: {0}")]
    ExponentMismatch(String),

    #[error("refinement did not converge: {0}")]
    NoConvergence(String),

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("eigendecomposition failed")]
    Eigen,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
