use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid algebra data: {0}")]
    InvalidAlgebra(String),

    #[error("weight {weight} is not integrable at level {level}")]
    NotIntegrable { weight: String, level: u32 },

    #[error("level {requested} exceeds module cutoff {cutoff}")]
    CutoffExceeded { requested: usize, cutoff: usize },

    #[error("block ({target}, {source_level}) lies outside the built window {max_target}x{max_source}")]
    OutsideWindow {
        target: usize,
        source_level: usize,
        max_target: usize,
        max_source: usize,
    },

    #[error("contravariant form is not positive semidefinite at level {level} (pivot {pivot})")]
    IntegrabilityViolation { level: usize, pivot: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("module chain is not composable: {0}")]
    ChainMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("power iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
