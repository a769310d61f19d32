use thiserror::Error;

/// Error type for all core operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid distribution at index {index}: {reason} (value {value})")]
    InvalidDistribution {
        index: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid channel row {row}: {reason} (value {value})")]
    InvalidChannel {
        row: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("alpha = 1 is not a valid Renyi order; use the KL-based quantity instead")]
    AlphaOne,

    #[error("parameter {name} = {value} outside domain {domain}")]
    DomainViolation {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("iteration did not converge within {iters} steps (last change {last_change:.3e})")]
    NonConvergence { iters: usize, last_change: f64 },

    #[error("size cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("rate window is infeasible: [{lo}, {hi}]")]
    InfeasibleWindow { lo: f64, hi: f64 },

    #[error("degenerate mixing weight in simulation build: {detail}")]
    DegenerateMix { detail: String },

    #[error("linear program failed: {0}")]
    LpFailure(String),

    #[error("combinatorial overflow computing {what}")]
    Overflow { what: &'static str },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
