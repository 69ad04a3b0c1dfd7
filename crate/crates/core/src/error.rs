use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("jump function domain exhausted at {at} (generated up to {generated_up_to})")]
    DomainExhausted { at: f64, generated_up_to: f64 },

    #[error("race exhausted the jump function after {visited} jumps without stopping")]
    Exhausted { visited: usize },

    #[error("time {t} outside trajectory horizon {horizon}")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("state space of {states} leaves exceeds the dense limit {limit}")]
    TooLarge { states: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("sample has {got} entries, {needed} required")]
    InsufficientSample { got: usize, needed: usize },

    #[error("empty sample")]
    EmptySample,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
