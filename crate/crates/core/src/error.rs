use thiserror::Error;

/// Errors raised by the evaluators, transforms and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("series did not converge within {terms} terms (partial value {partial})")]
    Convergence { partial: f64, terms: usize },

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("outside region of convergence: {0}")]
    Region(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("envelope fit failed: {0}")]
    Fit(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
