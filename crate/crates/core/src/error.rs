use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("alphabet mismatch: {left} vs {right} symbols")]
    AlphabetMismatch { left: usize, right: usize },

    /// Exhaustive enumeration would visit more cells than allowed.
    #[error("enumeration budget exceeded: {cells:.3e} cells > {budget:.3e}")]
    BudgetExceeded { cells: f64, budget: f64 },

    /// A structural assumption (e.g. unique minimizers) does not hold for the input.
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
