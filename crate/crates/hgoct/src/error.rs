use thiserror::Error;

/// Errors produced by the control toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("momentum-space operator requires a spatial-grid basis")]
    BasisMismatch,

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("field spectrum has weight {value:e} in bin {bin} where the field filter is zero")]
    FieldOutsideFilter { bin: usize, value: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("step size underflow during propagation at t = {0}")]
    StepSizeUnderflow(f64),

    #[error("convergence metric is undefined for a zero field")]
    ZeroField,

    #[error("relaxation mixing parameter fell below the abort threshold")]
    MixingUnderflow,
}

pub type Result<T> = std::result::Result<T, Error>;
