use thiserror::Error;

/// Errors raised by field construction, linear algebra, code handling and repair search.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u32),

    #[error("modulus must be monic of degree {degree} with coefficients below {p}")]
    BadModulus { degree: u32, p: u32 },

    #[error("modulus {0:?} is reducible")]
    ReducibleModulus(Vec<u32>),

    #[error("size {size} exceeds the configured cap {cap}")]
    TooLarge { size: u128, cap: u128 },

    #[error("element {value} is out of range for a field of order {q}")]
    ElementOutOfRange { value: u32, q: u32 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("search budget exceeded: {needed} candidates, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("code is not MDS: block submatrix for nodes {0:?} is singular")]
    NotMds(Vec<usize>),

    #[error("invalid repair witness: {0}")]
    InvalidWitness(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("malformed document: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
