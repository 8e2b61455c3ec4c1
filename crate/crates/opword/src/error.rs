use thiserror::Error;

/// Crate-wide error type. Pipeline errors name the stage that failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not hermitian: {0}")]
    NotHermitian(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("unsupported operator class in {stage}: {detail}")]
    UnsupportedClass { stage: &'static str, detail: String },
    #[error("not unitary at {stage}: window residual {residual:.3e}")]
    NotUnitary { stage: &'static str, residual: f64 },
    #[error("column pair is not isometric: window residual {0:.3e}")]
    NotIsometricColumn(f64),
    #[error("dimension obstruction in {stage}: {detail}")]
    DimensionObstruction { stage: &'static str, detail: String },
    #[error("unsupported defect projection: {0}")]
    UnsupportedDefect(String),
    #[error("class overflow: {0}")]
    ClassOverflow(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
