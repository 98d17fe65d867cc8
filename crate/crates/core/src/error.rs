use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FelmError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("degenerate range for input {index}: min {min} >= max {max}")]
    DegenerateRange { index: usize, min: f64, max: f64 },

    #[error("no rule fires (all upper firing strengths are zero)")]
    NoRuleFires,

    #[error("lower firing strengths are all zero; uncertainty bounds are undefined")]
    NoLowerFiring,

    #[error("type reduction did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("brute-force reduction supports at most {max} rules, got {got}")]
    TooManyRules { max: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("vehicle pose is outside the tank")]
    OutsideTank,

    #[error("missing sensor reading: {0}")]
    MissingSensor(&'static str),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, FelmError>;
