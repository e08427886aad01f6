use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A keypoint file does not match the per-frame schema.
    #[error("frame {frame}: {message}")]
    Frame { frame: usize, message: String },

    #[error("{field}: {message}")]
    Schema { field: String, message: String },

    #[error("{stream} timestamps not strictly increasing at frame {frame}")]
    Ordering { stream: &'static str, frame: usize },

    #[error("insufficient {0}")]
    Insufficient(&'static str),

    #[error("no landmarks")]
    NoLandmarks,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("image widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),

    #[error("ROC undefined: scores must include both classes")]
    RocUndefined,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite loss at epoch {epoch} (train_loss={train_loss}, val_loss={val_loss})")]
    NonFiniteLoss {
        epoch: usize,
        train_loss: f64,
        val_loss: f64,
    },

    #[error("missing input file: expected {}", .0.display())]
    MissingInput(PathBuf),

    #[error("unsupported model format version {0}")]
    ModelVersion(u32),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Png(#[from] png::EncodingError),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn frame(frame: usize, message: impl Into<String>) -> Self {
        Error::Frame {
            frame,
            message: message.into(),
        }
    }
}
