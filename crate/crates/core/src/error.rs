use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Wrong number of factors for an n-ary product.
    #[error("arity error: {count} factors cannot be multiplied with arity {arity}; allowed counts are l*(n-1)+1")]
    Arity { arity: usize, count: usize },

    /// Input data violates a structural invariant (norm, coefficient product, ...).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Exhaustive work would exceed the configured budget.
    #[error("budget exceeded: {required} operations requested, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
