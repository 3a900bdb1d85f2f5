use thiserror::Error;

use crate::dynamics::SystemHistory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point count {got} does not match particle count {expected}")]
    PointCount { expected: usize, got: usize },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("foliation extraction failed: {0}")]
    Extraction(String),

    #[error("degenerate velocity for particle {particle} at τ = {tau}: {reason}")]
    Degenerate {
        particle: usize,
        tau: f64,
        reason: String,
        partial: Option<Box<SystemHistory>>,
    },

    #[error("world line does not cross the surface")]
    NoCrossing,

    #[error("fixed-point iteration did not converge after {iterations} iterations (last update {last_update:e})")]
    NoConvergence { iterations: usize, last_update: f64 },

    #[error("rejection sampling acceptance {rate:e} below 1e-4; refine the envelope")]
    LowAcceptance { rate: f64 },

    #[error("statistical test invalid: {0}")]
    InvalidTest(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn degenerate(particle: usize, tau: f64, reason: impl Into<String>) -> Self {
        Error::Degenerate {
            particle,
            tau,
            reason: reason.into(),
            partial: None,
        }
    }
}
