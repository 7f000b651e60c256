use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KgError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("lattice mismatch between operands")]
    LatticeMismatch,
    #[error("model parameter mismatch between operands")]
    ParamsMismatch,
    #[error("boost speed |beta| = {0} is not below 1")]
    Superluminal(f64),
    #[error("quadrature truncation check failed: relative mass change {0:e}")]
    QuadratureTruncation(f64),
    #[error("field is not real: deviation {0:e}")]
    NotRealField(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dual-path check failed: deviation {0:e}")]
    DualPathMismatch(f64),
    #[error("boundary wrap detected: edge amplitude ratio {0:e}")]
    BoundaryWrap(f64),
    #[error("point is not a lattice node")]
    OffGrid,
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("malformed rational: {0}")]
    MalformedRational(String),
    #[error("operator check failed: {0}")]
    OperatorCheck(String),
    #[error("state file error: {0}")]
    StateFormat(String),
}

pub type Result<T> = std::result::Result<T, KgError>;

pub(crate) fn ensure_finite(label: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(KgError::NonFinite(label.to_string()))
    }
}
