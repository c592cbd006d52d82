use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Shapes, axes or factorizations that do not line up.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A contraction network whose edges and free legs do not cover every axis exactly once.
    #[error("network error: {0}")]
    Network(String),

    /// Non-finite input, a failed factorization, or a value range that cannot be represented.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A dense materialization or enumeration larger than the configured limit.
    #[error("capacity error: {what} needs {requested} elements, limit is {limit}")]
    Capacity {
        what: String,
        requested: u128,
        limit: u128,
    },

    /// Every configuration was eliminated by the constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}
