use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("window of {size} sites exceeds the enumeration cap of {cap}")]
    EnumerationCap { size: usize, cap: usize },

    #[error("outside uniqueness regime: rate bound e^(alpha C)/alpha = {rate_bound:.6} >= 1 (C(beta) = {c_beta:.6})")]
    OutsideUniquenessRegime { c_beta: f64, rate_bound: f64 },

    #[error("no convergence after {iterations} iterations (last delta {last_delta:e})")]
    NonConvergence { iterations: usize, last_delta: f64 },

    #[error("unstable step at t = {time}: {detail}")]
    Instability { time: f64, detail: String },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
