use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or index fell outside its documented range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A budget-wrapped oracle refused a query past its limit.
    #[error("query budget exceeded: limit {limit}")]
    BudgetExceeded { limit: usize },

    /// An internal consistency check failed; the oracle or counter under
    /// test is broken (e.g. no candidate shift verifies).
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
