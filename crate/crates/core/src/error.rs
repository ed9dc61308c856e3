use thiserror::Error;

/// Unified error type for the campaign workbench.
#[derive(Debug, Error)]
pub enum Error {
    /// A value fell outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration, rejected before any work starts.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data is missing, malformed, or insufficient.
    #[error("data error: {0}")]
    Data(String),

    /// A reconfiguration target cannot be reached from the module pool.
    #[error("infeasible plan: {0}")]
    InfeasiblePlan(String),

    /// Operation not defined for this fleet kind.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
