use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("signal contains a non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("sampling period must be positive, got {0}")]
    InvalidPeriod(f64),
    #[error("window half-width L must be >= 1")]
    InvalidHalfWidth,
    #[error("kernel tap count must be >= 1, got {0}")]
    InvalidTapCount(i64),
    #[error("period ratio {0} is not representable as a small rational (irrational sampling-frequency pair?)")]
    IrrationalPeriodRatio(f64),
    #[error("stride must be >= 1 sample, got {num}/{den}")]
    StrideTooSmall { num: u64, den: u64 },
    #[error("cross-correlation output length would be {0}; input too short for the kernel")]
    EmptyCorrelation(i64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("filterbank needs at least {min} channels, got {got}")]
    TooFewChannels { min: usize, got: usize },
    #[error("band edges invalid: f_min={f_min}, f_max={f_max}, nyquist={nyquist}")]
    InvalidBand { f_min: f64, f_max: f64, nyquist: f64 },
    #[error("reference signal is identically zero; SI-SNR undefined")]
    ZeroReference,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
