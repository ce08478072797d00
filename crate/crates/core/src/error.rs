use thiserror::Error;

use crate::expr::EvalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("t = {t} lies outside the time interval ({min}, {max})")]
    OutsideInterval { t: f64, min: f64, max: f64 },
    #[error("lapse beta = {value} is not positive at {at}")]
    NonPositiveLapse { value: f64, at: String },
    #[error("fiber metric is not positive definite at {at} (min eigenvalue {min_eigenvalue})")]
    MetricDegeneracy { at: String, min_eigenvalue: f64 },
    #[error("immersion is degenerate at {at}: {reason}")]
    ImmersionDegeneracy { at: String, reason: String },
    #[error("frame error: {0}")]
    Frame(String),
    #[error("degenerate plane: |denominator| = {0:e}")]
    DegeneratePlane(f64),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported dimension n = {0}; this formula needs n > 2")]
    UnsupportedDimension(usize),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
