use thiserror::Error;

/// Errors shared by the kernel, measure, network, and synthesis layers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("model file parse error: {0}")]
    ModelParse(String),

    #[error("unsupported model version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
}

pub type Result<T> = std::result::Result<T, CoreError>;

/// Checks a slice for NaN/inf, naming the offending quantity.
pub fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::NonFinite(what.to_string()));
    }
    Ok(())
}

pub fn ensure_finite_scalar(value: f64, what: &str) -> Result<f64> {
    if !value.is_finite() {
        return Err(CoreError::NonFinite(what.to_string()));
    }
    Ok(value)
}
