use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("convolution budget exceeded: {required} entries required, {available} available")]
    BudgetExceeded { required: u128, available: u64 },

    #[error("local factor series at p = {p}, k = {k}, rho^2 = {rho_squared} did not contract within {cutoff} terms")]
    Divergence {
        p: u64,
        k: u32,
        rho_squared: String,
        cutoff: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
