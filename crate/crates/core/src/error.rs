use thiserror::Error;

/// Errors raised by the models and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Operand shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A linear system that must be solvable was numerically singular.
    #[error("ill-conditioned system: {0}")]
    Conditioning(String),
    /// The solver hit a non-finite objective or gradient.
    #[error("solver error after {iterations} iterations: {message}")]
    Solver {
        message: String,
        iterations: usize,
        trace: Vec<f64>,
    },
    /// Enumeration refused because the search space exceeds the cap.
    #[error("refusing to enumerate {size} selections (cap {cap})")]
    Refused { size: u128, cap: u128 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn dimension(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}
