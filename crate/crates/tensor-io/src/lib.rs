//! Tensor container, layouts and the on-disk tensor format shared by the
//! winowise crates.
//!
//! Tensors are immutable after construction: every mutating-looking helper
//! returns a new tensor, so values can be shared freely across threads.

mod error;
mod fractal;
mod io;
mod rng;
mod shape;
mod tensor;

pub use error::TensorError;
pub use fractal::{empty_nchw, fractal_to_nchw, from_ints, nchw_to_fractal, FRACTAL_C0};
pub use io::{read_tensor, write_tensor};
pub use rng::XorShift64Star;
pub use shape::{LayerShape, Padding};
pub use tensor::{Dtype, Dyadic, Layout, Tensor, TensorData};

pub type Result<T> = std::result::Result<T, TensorError>;
