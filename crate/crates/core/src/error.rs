use thiserror::Error;

/// Errors produced by the model, analysis and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("protocol {protocol} is not supported here: {reason}")]
    UnsupportedProtocol { protocol: String, reason: &'static str },

    #[error("no candidate base station for operator {operator}")]
    NoCandidate { operator: u8 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("malformed deployment record on line {line}: {reason}")]
    Record { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

/// Rejects NaN and values outside `[lo, hi]`.
pub(crate) fn check_range(name: &'static str, x: f64, lo: f64, hi: f64) -> Result<f64> {
    if x.is_nan() || x < lo || x > hi {
        Err(invalid(name, format!("{x} is outside [{lo}, {hi}]")))
    } else {
        Ok(x)
    }
}
