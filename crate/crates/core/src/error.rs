//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A coefficient vector does not define a valid angular distribution
    /// or Pickands dependence function.
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    /// Root bracketing failed: the target value is not enclosed.
    #[error("bracket error: {0}")]
    Bracket(String),

    /// An iterative procedure exhausted its iteration budget.
    #[error("no convergence after {iterations} iterations: {what}")]
    NonConvergence { what: String, iterations: usize },

    /// Input data carries no usable information (e.g. zero variance).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A partially specified coefficient sequence admits no valid completion.
    #[error("infeasible prefix: {0}")]
    InfeasiblePrefix(String),

    /// Posterior summaries were requested from an empty chain.
    #[error("empty chain")]
    EmptyChain,

    /// A file or argument could not be parsed.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
