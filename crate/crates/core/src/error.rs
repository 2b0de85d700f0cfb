use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {dim} outside supported range 1..={max}")]
    DimensionOutOfRange { dim: usize, max: usize },

    #[error("point count must be at least 1")]
    EmptyPointSet,

    #[error("point count {n} exceeds the maximum of {max}")]
    TooManyPoints { n: usize, max: usize },

    #[error("invalid point set: {0}")]
    InvalidPoints(String),

    #[error("critical grid of {grid} corners exceeds the budget of {budget}; use the lower-bound estimator")]
    BudgetExceeded { grid: u128, budget: u64 },

    #[error("size mismatch: {points} points but {weights} weights")]
    SizeMismatch { points: usize, weights: usize },

    #[error("weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },

    #[error("box-measure oracle misbehaved: {0}")]
    InvalidOracle(String),

    #[error("density vanishes at every point; the self-normalized estimator is undefined")]
    AllWeightsZero,

    #[error("density returned an invalid value {value} at point {index}")]
    InvalidDensity { index: usize, value: f64 },

    #[error("reference value is zero")]
    ZeroReference,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("not enough usable rows for a rate fit: {usable} (need at least 4)")]
    TooFewRows { usable: usize },

    #[error("fewer than two Monte Carlo repetitions succeeded ({succeeded} of {reps})")]
    TooFewRuns { succeeded: usize, reps: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
