use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bit count {bits} is not a multiple of {bits_per_symbol} bits per symbol")]
    BitCount { bits: usize, bits_per_symbol: usize },

    #[error("unsupported constellation order {0} (expected 4, 16, 64, 256, 1024 or 4096)")]
    UnsupportedOrder(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cyclic extension (prefix {n_cp}, suffix {n_cs}) exceeds block length {n_d}")]
    ExtensionTooLong { n_cp: usize, n_cs: usize, n_d: usize },

    #[error("target backoff {target_db:.2} dB is unreachable: {reason}")]
    UnreachableBackoff { target_db: f64, reason: String },

    #[error("input signal has zero power")]
    ZeroPower,

    #[error("not enough samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("training data matrix is rank deficient (condition number {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("equalizer bin {bin} is singular with zero regularization")]
    SingularBin { bin: usize },

    #[error("kernel matrix is not positive definite after jitter")]
    NotPositiveDefinite,

    #[error("regressor Gram matrix is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("no training samples for constellation point {index} and no ring fallback")]
    EmptyBin { index: usize },

    #[error("conditional bin for lag {lag} holds {hits} samples, need at least {needed}")]
    SparseBin { lag: i64, hits: usize, needed: usize },

    #[error("distortion covariance is singular after regularization")]
    SingularCovariance,

    #[error("damped normal equations stayed singular at damping {damping:.3e}")]
    SingularDamping { damping: f64 },

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("model dump: {0}")]
    ModelDump(String),

    #[error("results file: {0}")]
    Results(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            location: location.into(),
            message: message.into(),
        }
    }
}
