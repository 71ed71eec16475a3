use thiserror::Error;

/// Errors raised across the crate.
///
/// Validation checks (assumption reports, bound checks) never use this type
/// for a failed check; those failures are report entries.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("search failed: {0}")]
    Search(String),

    #[error("solver diverged after {iterations} iterations: {reason}")]
    Divergence { iterations: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
