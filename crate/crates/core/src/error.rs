//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by kernels, solvers, samplers and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A kernel or density was evaluated at a singular point.
    #[error("singularity error: {0}")]
    Singularity(String),
    /// A numerical routine failed to reach its tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Construction of a derived object (kernel table, convolution root) failed.
    #[error("construction error: {0}")]
    Construction(String),
    /// A requested computation exceeds the configured memory/size budget.
    #[error("resource error: {0}")]
    Resource(String),
    /// Not enough usable data for a fit.
    #[error("fit error: {0}")]
    Fit(String),
    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
