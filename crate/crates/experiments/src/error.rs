use ridgekern_core::CoreError;
use thiserror::Error;

/// Experiment-layer failures. `Config` and `Io` are user-input problems
/// (exit code 2 territory); criterion violations are not errors, they are
/// reported through verdicts.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),

    #[error("unresolved component reference `{0}`")]
    Unresolved(String),

    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    #[error("{0}")]
    Core(#[from] CoreError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

impl ExperimentError {
    /// True when the failure is a config/validation/IO problem rather than
    /// an internal numeric one.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            ExperimentError::Config(_)
                | ExperimentError::Unresolved(_)
                | ExperimentError::Hypothesis(_)
                | ExperimentError::Io(_)
        )
    }
}
