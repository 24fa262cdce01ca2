use thiserror::Error;

/// Errors raised by the samplers, solvers and statistical checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("argument {x} outside the supported domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("QL iteration did not converge for the block starting at index {block}")]
    NoConvergence { block: usize },

    #[error("Newton iteration for Gauss-Legendre nodes did not converge (order {order})")]
    QuadratureNewton { order: usize },

    #[error("dense eigensolver capped at n = {cap}, got n = {n}; use the tridiagonal path")]
    SizeCap { n: usize, cap: usize },

    #[error("brute-force path sum needs {paths} paths, above the limit of {limit}")]
    PathSumTooLarge { paths: f64, limit: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("singular matrix in Fredholm determinant factorization")]
    Factorization,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
