use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("user index {index} out of range for {n} users")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid system parameters: {0}")]
    InvalidParams(String),

    #[error("power allocation infeasible at user {user}: p = {value}")]
    Infeasible { user: usize, value: f64 },

    #[error("zero-rate user {user}: inverse energy efficiency is unbounded")]
    ZeroRateUser { user: usize },

    #[error("surrogate domain violation at user {user}: g = {g}")]
    SurrogateDomain { user: usize, g: f64 },

    #[error("invalid transform operand at index {index}: {value}")]
    InvalidTransformOperand { index: usize, value: f64 },

    #[error("invalid operating point at user {user}: q = {value}")]
    InvalidOperatingPoint { user: usize, value: f64 },

    #[error("newton diverged after {iterations} iterations (|c|inf = {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("singular jacobian")]
    SingularJacobian,

    #[error("instance too large for exhaustive search: {n} users (max {max})")]
    InstanceTooLarge { n: usize, max: usize },

    #[error("nonpositive denominator {value} at x = {x}")]
    NonPositiveDenominator { x: f64, value: f64 },

    #[error("nonpositive entry at index {index}: {value}")]
    NonPositiveEntry { index: usize, value: f64 },

    #[error("empty candidate set")]
    EmptyCandidates,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
