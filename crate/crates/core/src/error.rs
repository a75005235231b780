use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural mismatch: {0}")]
    Structure(String),
    #[error("singular element: {0}")]
    Singular(String),
    #[error("capability exceeded: {0}")]
    Capability(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("no convergence: {msg} (best estimate {best}, error estimate {err:.3e})")]
    Convergence {
        msg: String,
        best: Complex64,
        err: f64,
    },
    #[error("calibration failure: {0}")]
    Calibration(String),
    #[error("sampler failure: {0}")]
    Sampler(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
