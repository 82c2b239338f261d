use thiserror::Error;

/// Errors produced by the estimation, tuning and simulation routines.
#[derive(Debug, Error)]
pub enum LavaError {
    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("column {column} of the design is identically zero")]
    ZeroColumn { column: usize },

    #[error("design is rank deficient and the ridge penalty is zero")]
    RankDeficient,

    #[error("solver did not converge after {iterations} sweeps (kkt residual {kkt_residual:e})")]
    NotConverged { iterations: usize, kkt_residual: f64 },

    #[error("problem too large for this routine: p = {p}, limit {limit}")]
    TooLarge { p: usize, limit: usize },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LavaError>;
