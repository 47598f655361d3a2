use thiserror::Error;

use crate::matrix::ValidationReport;

/// Errors raised by the model types and the step/simulation operations.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("an economy needs at least one agent")]
    EmptyEconomy,

    #[error("dimension mismatch: expected {expected} agents, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("wealth of agent {index} is {value}; wealth must be finite and non-negative")]
    InvalidWealth { index: usize, value: f64 },

    #[error("total wealth overflows the representable range")]
    TotalOverflow,

    #[error("agent index {index} out of range for {n} agents")]
    AgentOutOfRange { index: usize, n: usize },

    #[error("matrix entry ({row}, {col}) out of range for dimension {n}")]
    EntryOutOfRange { row: usize, col: usize, n: usize },

    #[error("matrix entry ({row}, {col}) given more than once")]
    DuplicateEntry { row: usize, col: usize },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("dimension {n} exceeds the supported index range")]
    DimensionTooLarge { n: usize },

    #[error("circulation matrix is not column-stochastic: {0}")]
    InvalidMatrix(Box<ValidationReport>),

    #[error("schedule exhausted: {requested} steps requested, {available} available")]
    ScheduleExhausted { requested: u64, available: u64 },

    #[error("dense product refused for n = {n} (limit {limit}); step the vector instead")]
    ProductTooLarge { n: usize, limit: usize },
}
