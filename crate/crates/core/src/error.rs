use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree distribution is empty")]
    EmptyDistribution,
    #[error("negative weight {weight} for degree {degree}")]
    NegativeWeight { degree: usize, weight: f64 },
    #[error("degree {degree} out of range 1..={k}")]
    DegreeOutOfRange { degree: usize, k: usize },
    #[error("degree {0} listed more than once")]
    DuplicateDegree(usize),
    #[error("weights sum to {sum}, expected 1 within 1e-9")]
    SumNotOne { sum: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("presence probability for degree {degree} is {value} > 1 (n·Ω_d exceeds C(k, d))")]
    ResultExceedsOne { degree: usize, value: f64 },
    #[error("payload length mismatch: expected {expected} words, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("instance carries no payload values")]
    MissingValues,
    #[error("(1+δ)·Ω_1 = {0} ≥ 1, the degree-one coefficient is undefined")]
    DegreeOneSaturated(f64),
    #[error("value {0} outside the allowed range")]
    OutOfRange(f64),
    #[error("k = {k} exceeds the limit {limit} for this engine")]
    KTooLarge { k: usize, limit: usize },
    #[error("precision loss: row-sum deviation {deviation:e} exceeds {threshold:e}; raise precision_bits or use the naive engine")]
    PrecisionLoss { deviation: f64, threshold: f64 },
    #[error("unsupported precision of {0} bits (supported: 1..=256)")]
    UnsupportedPrecision(u32),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Numeric failures (as opposed to invalid input) are reported with a
    /// distinct exit status by the CLI.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::PrecisionLoss { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
