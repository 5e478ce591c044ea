use thiserror::Error;

/// Errors produced by tensor construction, layout conversion and file I/O.
#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },

    #[error("dtype mismatch: expected {expected}, got {got}")]
    DtypeMismatch { expected: String, got: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl TensorError {
    pub fn shape(msg: impl Into<String>) -> Self {
        TensorError::Shape(msg.into())
    }

    pub fn format(offset: u64, msg: impl Into<String>) -> Self {
        TensorError::Format {
            offset,
            msg: msg.into(),
        }
    }
}
