use thiserror::Error;

#[derive(Debug, Error)]
pub enum DgError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("validation failed: {0}")]
    Invalid(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("uncertified resolution: {0}")]
    Uncertified(String),
    #[error("missing witness: {0}")]
    MissingWitness(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DgError>;
