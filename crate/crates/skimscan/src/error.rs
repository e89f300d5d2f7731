use thiserror::Error;

/// Errors produced by the selection engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("feature required: {0}")]
    FeatureRequired(String),

    #[error("missing logits: {0}")]
    MissingLogits(String),

    #[error("unsupported dataset: {0}")]
    UnsupportedDataset(String),

    #[error("diverged training: non-finite loss {loss} at epoch {epoch}, batch {batch}")]
    DivergedTraining {
        epoch: usize,
        batch: usize,
        loss: f64,
    },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("incomplete results: {0}")]
    IncompleteResults(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
