use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum UtmError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),

    #[error("non-finite integrand value at lambda = {lambda}")]
    NaNEncountered { lambda: Complex64 },

    #[error("lambda = {lambda} lies on a branch cut and no side was given")]
    Cut { lambda: Complex64 },

    #[error("banded solve hit a zero pivot at row {row}")]
    SingularSystem { row: usize },

    #[error("log-log fit unstable: residual {residual:.3e} exceeds {limit}")]
    FitUnstable { residual: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, UtmError>;
