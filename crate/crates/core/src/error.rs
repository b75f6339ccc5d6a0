use thiserror::Error;

use crate::grid::Field2D;
use crate::solver::PicardDiagnostics;

pub type Result<T> = std::result::Result<T, ZkError>;

#[derive(Debug, Error)]
pub enum ZkError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported order {order}: {reason}")]
    UnsupportedOrder { order: f64, reason: &'static str },

    #[error("decay precondition violated: |f| = {value:e} (relative) at radius {radius}")]
    DecayPrecondition { value: f64, radius: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureFailure { estimate: f64, tolerance: f64 },

    #[error("field under-resolved: energy fraction {fraction:e} in the outer band exceeds {limit:e}")]
    Resolution { fraction: f64, limit: f64 },

    #[error("far-field truncation bound {bound:e} exceeds tolerance {tolerance:e}")]
    Truncation { bound: f64, tolerance: f64 },

    #[error("mapped support leaves the box: relative amplitude {amplitude:e} lands outside")]
    DomainOverflow { amplitude: f64 },

    #[error("Picard iteration does not contract (last ratios {:?}); reduce T", last_ratios(.0))]
    NoContraction(Box<PicardDiagnostics>),

    #[error("instability at t = {time}: L2 norm grew by a factor {growth}")]
    Instability {
        time: f64,
        growth: f64,
        last_good: Box<Field2D>,
    },

    #[error("format error at byte offset {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("config error on line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn last_ratios(d: &PicardDiagnostics) -> Vec<f64> {
    d.ratios.iter().rev().take(3).rev().copied().collect()
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ZkError::InvalidInput(msg.into()))
}
