use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuantError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("accumulator overflow: {0}")]
    Overflow(String),

    #[error(transparent)]
    Winograd(#[from] winograd_core::WinogradError),

    #[error(transparent)]
    Tensor(#[from] tensor_io::TensorError),
}
