use thiserror::Error;

/// Every fallible operation in the crate returns this error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dagger| = {defect:e})")]
    NonHermitianInput { defect: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid clause {clause:?} for {bits} bits")]
    InvalidClause { clause: Vec<usize>, bits: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("spectral density requires a non-negative frequency, got {0}")]
    NegativeFrequency(f64),

    #[error("divergent limit: {0}")]
    DivergentLimit(String),

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error("quadrature did not converge: estimate {value:e}, error {error:e} after {intervals} intervals")]
    QuadratureFailure { value: f64, error: f64, intervals: usize },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("no instability: B = {0} is not positive")]
    BNotPositive(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("non-finite values produced: {0}")]
    NumericOverflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
