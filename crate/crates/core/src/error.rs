use thiserror::Error;

/// Errors raised across the simulation, learning, and tooling layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state corruption: {0}")]
    StateCorruption(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pivot constraint drifted by {drift:.3e} m")]
    ConstraintDrift { drift: f64 },

    #[error("one-class SVM did not converge after {iterations} iterations (KKT violation {violation:.3e})")]
    SvmNotConverged { iterations: usize, violation: f64 },

    #[error("action network training diverged (last finite loss {last_finite_loss:.6e})")]
    TrainingDiverged { last_finite_loss: f64 },

    #[error("no training pairs reach success threshold {threshold}; relax the threshold")]
    EmptyTrainingSet { threshold: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient dynamics: {0}")]
    InsufficientDynamics(String),

    #[error("region form: {0}")]
    RegionForm(String),

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("file not found: {path} (expected {expected})")]
    FileNotFound { path: String, expected: String },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
