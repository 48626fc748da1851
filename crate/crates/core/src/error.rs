use thiserror::Error;

use crate::recurrence::RecurrenceCoefficients;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("measure is not normalized: total mass {mass}")]
    Normalization { mass: f64 },

    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    #[error("numerical breakdown at k = {k}: beta = {beta:e} (discretization too coarse for the requested degree)")]
    Breakdown { k: usize, beta: f64 },

    #[error("numerical instability: {0}")]
    Instability(String),

    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    Convergence {
        iterations: usize,
        last_change: f64,
        previous: Box<RecurrenceCoefficients>,
        last: Box<RecurrenceCoefficients>,
    },

    #[error("index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },

    #[error("symmetric tridiagonal eigensolver did not converge after {iterations} iterations")]
    Eigensolver { iterations: usize },

    #[error("insufficient recurrence coefficients: need {needed}, have {available}")]
    InsufficientCoefficients { needed: usize, available: usize },

    #[error("invalid endpoint {endpoint}: must not lie inside the open support ({a}, {b})")]
    InvalidEndpoint { endpoint: f64, a: f64, b: f64 },

    #[error("interval [{a}, {b}] is not finite; truncate it first")]
    InfiniteInterval { a: f64, b: f64 },

    #[error("non-positive Gauss weight {weight:e} at node {node}")]
    NonPositiveWeight { node: f64, weight: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("tensor order must be at least 1, got {0}")]
    Order(usize),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("integration blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("problem infeasible: {0}")]
    Infeasible(String),

    #[error("solver stopped at iteration {iterations} without reaching tolerance (stationarity {stationarity:e}, gap {gap:e})")]
    SolverTolerance {
        iterations: usize,
        stationarity: f64,
        gap: f64,
    },
}
