//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FkpError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solution blew up at t = {t}: {detail}")]
    BlowUp { t: f64, detail: String },

    #[error("nonlinear CFL bound violated at t = {t}: max|u|*max|xi|*dt = {product:.3e} > 1")]
    CflViolation { t: f64, product: f64 },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
