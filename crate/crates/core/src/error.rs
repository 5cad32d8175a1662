use thiserror::Error;

/// Errors raised by the numerical routines and the simulation lab.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bracketing or iterative solve did not converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A search found nothing in its scan range.
    #[error("not found: {0}")]
    NotFound(String),

    /// The fixed-point iteration for the asymptotic spinodal left the log domain.
    #[error("fixed-point iteration diverged after {iterations} steps (last d = {last})")]
    Divergence { iterations: usize, last: f64 },

    /// A threshold-curve trace lost one of its branches.
    #[error("trace failed at x = {x}, z = {z}: {reason}")]
    TraceFailure { x: f64, z: f64, reason: String },

    /// A K-COL state left the admissible region.
    #[error("state out of domain at (x = {x}, y = {y}): {reason}")]
    StateDomain { x: f64, y: f64, reason: String },

    /// The input is valid but outside the regime the formula covers.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    /// Two branches coincide where they should be distinct.
    #[error("degenerate branches: {0}")]
    Degenerate(String),

    /// An instance is too large for an exhaustive routine.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The input is structurally invalid for the requested operation.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable kebab-case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Numeric(_) => "numeric",
            Error::NotFound(_) => "not-found",
            Error::Divergence { .. } => "divergence",
            Error::TraceFailure { .. } => "trace-failure",
            Error::StateDomain { .. } => "state-domain",
            Error::OutOfRegime(_) => "out-of-regime",
            Error::Degenerate(_) => "degenerate",
            Error::Capacity(_) => "capacity",
            Error::Invalid(_) => "invalid",
            Error::Parse { .. } => "parse",
        }
    }
}
