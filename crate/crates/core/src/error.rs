use thiserror::Error;

/// Failure modes shared by every module of the core crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not converge: estimated error {achieved_error:e} after {subdivisions} subdivisions")]
    Quadrature { achieved_error: f64, subdivisions: usize },
    #[error("gamma function pole at {0}")]
    GammaPole(f64),
    #[error("special function argument outside supported domain: {0}")]
    Domain(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported configuration: {0}")]
    Unsupported(&'static str),
    #[error("problem too large for exact enumeration (N = {n}, limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
