use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid degree range: {0}")]
    Range(String),

    #[error("value outside its domain: {0}")]
    Domain(String),

    #[error("degree {0} is not part of the distribution")]
    UnknownDegree(u32),

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("root finding did not reach tolerance {tol:e}: best v = {best}, |g(v)| = {residual:e}")]
    Convergence { best: f64, residual: f64, tol: f64 },

    #[error("integration left [0, 1] at t = {t}; retry with a smaller step than {dt}")]
    Integration { t: f64, dt: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}
