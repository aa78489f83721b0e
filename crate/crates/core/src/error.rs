use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cholesky factorisation failed at pivot {pivot} (value {value:e})")]
    Cholesky { pivot: usize, value: f64 },
    #[error("non-finite value {what} at t = {t}")]
    NonFinite { what: String, t: f64 },
    #[error("coefficient evaluation failed at t = {t}, x = {x:?}: {reason}")]
    Coefficient { t: f64, x: Vec<f64>, reason: String },
    #[error("inconsistent audit: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
