use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("variable x{index} out of range (n = {n})")]
    VariableOutOfRange { index: usize, n: usize },

    #[error("non-rational coefficient at offset {pos}")]
    NonRational { pos: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("prime {p} divides a coefficient denominator")]
    BadPrime { p: u64 },

    #[error("coefficient {0} is not invertible in the target ring")]
    NotInvertible(String),

    #[error("enumeration of {needed} points exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("no linear recurrence of order <= {d_max} fits the series")]
    NoRecurrenceFound { d_max: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
