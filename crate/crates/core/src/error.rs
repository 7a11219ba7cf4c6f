use thiserror::Error;

/// Errors produced by the estimation and simulation routines.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("series must contain at least one observation")]
    EmptySeries,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },
    #[error("weight at position {index} must be strictly positive, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("evaluation point {t} outside ({lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("quantile table has no entry for probability {p}")]
    MissingProbe { p: f64 },
    #[error("maximum lag {lag} must be smaller than the series length {n}")]
    LagTooLarge { lag: usize, n: usize },
    #[error("series has zero variance; autocorrelations are undefined")]
    ZeroVariance,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
