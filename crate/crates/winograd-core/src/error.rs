use thiserror::Error;

#[derive(Debug, Error)]
pub enum WinogradError {
    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("unsupported workload: {0}")]
    UnsupportedWorkload(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("integer overflow in exact convolution path ({0})")]
    Overflow(String),

    #[error(transparent)]
    Tensor(#[from] tensor_io::TensorError),
}
