//! Tap-wise quantization machinery: scalar quantizers, per-tap scale
//! calibration, power-of-two scale rounding and its learning gradient, the
//! integer Winograd pipeline with tap-wise rescaling, and the quantization
//! error analysis suite.

mod calib;
mod error;
mod pinv;
mod pipeline;
mod quantizer;
mod report;

pub use calib::{CalibState, ScaleRole, TapScaleMatrix};
pub use error::QuantError;
pub use pinv::pseudo_inverse;
pub use pipeline::{combined_scale, quantized_winograd_conv2d, RescaleBackend};
pub use quantizer::{
    dequantize, pow2_round_scalar, quantize, round_half_away, ste_grad_log2t, QuantParams,
};
pub use report::{
    quant_error_report, synthetic_tapscaled_weights, Domain, ErrorReport, Strategy, UnitStats,
};

pub type Result<T> = std::result::Result<T, QuantError>;
