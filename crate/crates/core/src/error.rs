use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole at {0}")]
    Pole(Complex64),
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("requested tolerance {requested:e} not reached (achieved {achieved:e})")]
    Accuracy { requested: f64, achieved: f64 },
    #[error("not implemented: {0}")]
    NotImplemented(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("data error: {0}")]
    Data(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
