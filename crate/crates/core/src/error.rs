use thiserror::Error;

/// Errors produced anywhere in the forecasting toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("input contains no data")]
    EmptyInput,

    #[error("vehicle {0} not present in records")]
    UnknownVehicle(i64),

    #[error("duplicate frame {frame} for vehicle {vehicle}")]
    DuplicateFrame { vehicle: i64, frame: i64 },

    #[error("invalid resampling period {period} (sample period {sample_period})")]
    InvalidPeriod { period: f64, sample_period: f64 },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("non-finite input value {0}")]
    NonFiniteInput(f64),

    #[error("invalid horizon {0}, must be at least 1")]
    InvalidHorizon(usize),

    #[error("value {value} outside domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("possibility vector has no positive component")]
    AllZeroPossibility,

    #[error("model has not been fitted")]
    UnfittedModel,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("training diverged at iteration {iteration} (loss {loss})")]
    DivergedTraining { iteration: usize, loss: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("chart series '{0}' is empty")]
    EmptySeries(String),

    #[error("too many series: {0} (at most 8)")]
    TooManySeries(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot parse model file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
