//! Exact Winograd transforms and convolution for F2/F4, a direct-convolution
//! oracle, and fixed-point bit-growth analysis.
//!
//! All transform sets are stored as exact rationals. The convolution paths
//! come in three modes that share the same tiling: IEEE f64, exact integer
//! (integer-scaled transforms with one exact division at the end), and exact
//! rational.

mod bits;
mod conv;
mod error;
mod matrix;
mod transform;

pub use bits::{bit_growth, quantized_accumulator_bits, BitBudget};
pub use conv::{direct_conv2d, winograd_conv2d, winograd_input_taps};
pub use error::WinogradError;
pub use matrix::{IntMat, Mat, Rat};
pub use transform::{
    input_transform_f64, input_transform_rat, mac_reduction, make_transform_set,
    output_transform_f64, output_transform_rat, tile_macs, toom_cook_transform,
    validate_transform_set, weight_transform_f64, weight_transform_rat, winograd_tile_rat,
    TransformSet,
};

pub type Result<T> = std::result::Result<T, WinogradError>;

/// Transform kinds referenced by bit-growth helpers and the perf model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Input,
    Weight,
    Output,
}
