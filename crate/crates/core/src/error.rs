//! Crate-wide error type.

use thiserror::Error;

/// Errors returned by the simulation and analysis operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Constellation construction failed an invariant.
    #[error("invalid constellation: {0}")]
    InvalidConstellation(String),
    /// Requested Fock truncation cannot represent the state to tolerance.
    #[error("Fock truncation too small: {0}")]
    Truncation(String),
    /// A density-operator decomposition is numerically unusable.
    #[error("ill-conditioned state: {0}")]
    IllConditioned(String),
    /// A covariance matrix violates the physicality bound.
    #[error("unphysical state: {0}")]
    UnphysicalState(String),
    /// Key rate is non-positive already at zero excess noise.
    #[error("no positive key rate at eps=0 (rate = {0})")]
    NoPositiveRate(f64),
    /// Saturation limits are inverted or degenerate.
    #[error("invalid saturation limits: lower {0} >= upper {1}")]
    InvalidLimits(f64, f64),
    /// Invalid or unsupported acquisition parameters.
    #[error("invalid acquisition: {0}")]
    InvalidAcquisition(String),
    /// SNU calibration produced a non-positive shot-noise estimate.
    #[error("calibration failure: Var[shot] - Var[thermal] = {0} <= 0")]
    CalibrationFailure(f64),
    /// Estimator input carries no usable signal variance.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    /// Waveform design parameters are out of range.
    #[error("waveform design: {0}")]
    Waveform(String),
    /// Report emission got nothing to write.
    #[error("empty input: {0}")]
    EmptyInput(String),
    /// Malformed configuration.
    #[error("config: {0}")]
    Config(String),
    /// Malformed or truncated binary file.
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
