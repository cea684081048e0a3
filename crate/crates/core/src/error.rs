use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: value {value:.6e}, error estimate {error:.3e}")]
    NonConvergent { value: f64, error: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("ratio estimator denominator {mean:.3e} is within {sigma} standard errors ({std_error:.3e}) of zero")]
    DegenerateDenominator { mean: f64, std_error: f64, sigma: f64 },

    #[error("field strength vanishes; the small-spacing ratio is undefined")]
    DegenerateFieldStrength,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
