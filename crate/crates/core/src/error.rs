use thiserror::Error;

/// Errors raised by the plasmon pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside the domain")]
    Domain { what: &'static str, value: f64 },

    #[error("root not bracketed: f({a}) and f({b}) have the same sign")]
    Bracket { a: f64, b: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("found {found} physical modes, {wanted} requested")]
    InsufficientModes { found: usize, wanted: usize },

    #[error("mode {mode} has no solution at k = {k} nm^-1 (cut off)")]
    NoSolution { mode: usize, k: f64 },

    #[error("normalization denominator {value} is not positive")]
    InvalidNormalization { value: f64 },

    #[error("relative wavevector {k} nm^-1 is outside the admissible range of the effective model")]
    NonAdmissible { k: f64 },

    #[error("resolution budget exceeded: {0}")]
    Resolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
