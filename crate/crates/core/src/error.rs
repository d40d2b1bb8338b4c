use thiserror::Error;

#[derive(Debug, Error)]
pub enum CannError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("unknown dataset `{name}` (valid names: {})", valid.join(", "))]
    UnknownDataset { name: String, valid: Vec<String> },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("at index {index}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<CannError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CannError>;

pub(crate) fn check_stretch(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(CannError::Domain(format!(
            "stretch must be finite and positive, got {lambda}"
        )))
    }
}
