use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine exhausted its budget before reaching the requested accuracy.
    #[error("numeric error in {routine}: {reason} (residual estimate {residual:e})")]
    Numeric {
        routine: &'static str,
        reason: String,
        residual: f64,
    },

    /// Simulation finished without enough observations for a source.
    #[error("insufficient data: source {index} has {delivered} delivered updates in the measurement window")]
    InsufficientData { index: usize, delivered: usize },

    /// Optimizer failed; carries the last iterate's diagnostics.
    #[error("{method} solver failed after {iterations} iterations: {reason} (objective {objective:e})")]
    Solver {
        method: &'static str,
        iterations: usize,
        reason: String,
        objective: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn numeric(routine: &'static str, reason: impl Into<String>, residual: f64) -> Error {
    Error::Numeric {
        routine,
        reason: reason.into(),
        residual,
    }
}
