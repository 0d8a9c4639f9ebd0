use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {found} does not match grid size {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("frame conversion {from:?} -> {to:?} is not supported here")]
    UnsupportedFrame {
        from: crate::grid::Frame,
        to: crate::grid::Frame,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("field is not odd: value at origin is {0:e}")]
    NotOdd(f64),

    #[error("CFL violated: dt = {dt} > 0.9 * dx = {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("causality violated: half extent {half_extent} < t_final + support + margin = {required}")]
    Causality { half_extent: f64, required: f64 },

    #[error("blow-up at step {step} (t = {time}): max |v| = {max_abs:e} exceeds cap {cap}")]
    BlowUp {
        step: usize,
        time: f64,
        max_abs: f64,
        cap: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular tridiagonal system at row {0}")]
    Singular(usize),

    #[error("eigen-solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
