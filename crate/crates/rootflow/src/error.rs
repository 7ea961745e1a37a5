//! Error type shared by all engine modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid function: {0}")]
    InvalidGrid(String),

    #[error("density not strictly positive: u({theta:.6}) = {value:.6e}")]
    NonPositiveDensity { theta: f64, value: f64 },

    #[error("cdf inversion did not converge after {iterations} iterations (residual {residual:.3e})")]
    CdfNoConvergence { iterations: usize, residual: f64 },

    #[error("invalid root configuration: {0}")]
    InvalidRoots(String),

    #[error("cotangent sum evaluated within {distance:.3e} of root {index}")]
    PoleAtRoot { index: usize, distance: f64 },

    #[error("root solve in gap {gap} did not converge after {iterations} iterations")]
    GapNoConvergence { gap: usize, iterations: usize },

    #[error("oracle sign scan found {found} roots, expected {expected}")]
    OracleScanMismatch { found: usize, expected: usize },

    #[error("positivity lost: min u = {min_u:.6e}")]
    PositivityLoss { min_u: f64 },

    #[error("time step {dt:.3e} exceeds stability bound {bound:.3e}")]
    UnstableTimeStep { dt: f64, bound: f64 },

    #[error("perturbation amplitude {amplitude:.3e} exceeds a quarter of the minimum gap {min_gap:.3e}")]
    PerturbationTooLarge { amplitude: f64, min_gap: f64 },

    #[error("F(a) requires a in (0, pi), got {0}")]
    OutOfDomain(f64),

    #[error("fit requires at least 3 points with positive ordinates: {0}")]
    InvalidFit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
