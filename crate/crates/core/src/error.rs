use alloc::string::String;
use core::fmt;

/// Errors raised by the solvers and domain constructors.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Latitude or longitude out of range.
    InvalidCoordinate { lat: f64, lon: f64 },
    /// A placement model violates one of its parameter invariants.
    InvalidModel(String),
    /// A rebalancing instance violates one of its invariants.
    InvalidInstance(String),
    /// The instance is larger than the exact solver accepts.
    ExactLimitExceeded { size: usize, limit: usize, hint: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidCoordinate { lat, lon } => {
                write!(f, "coordinate out of range: lat {lat}, lon {lon}")
            }
            Error::InvalidModel(msg) => write!(f, "invalid placement model: {msg}"),
            Error::InvalidInstance(msg) => write!(f, "invalid rebalancing instance: {msg}"),
            Error::ExactLimitExceeded { size, limit, hint } => write!(
                f,
                "instance size {size} exceeds the exact solver limit {limit}; use {hint}"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
