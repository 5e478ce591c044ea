use crate::{QuantError, Result};

/// Uniform quantizer parameters.
///
/// `offset` is only used by the error-analysis mode; inference paths keep it
/// at zero. Rounding is fixed to round-half-away-from-zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantParams {
    pub bits: u32,
    pub scale: f64,
    pub offset: f64,
}

impl QuantParams {
    pub fn new(bits: u32, scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(QuantError::Domain(format!("scale must be > 0, got {scale}")));
        }
        if !(2..=31).contains(&bits) {
            return Err(QuantError::Domain(format!("bits must be in 2..=31, got {bits}")));
        }
        Ok(QuantParams {
            bits,
            scale,
            offset: 0.0,
        })
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn q_min(&self) -> i64 {
        -(1i64 << (self.bits - 1))
    }

    pub fn q_max(&self) -> i64 {
        (1i64 << (self.bits - 1)) - 1
    }
}

/// Round half away from zero (the fixed-point convention used throughout).
pub fn round_half_away(x: f64) -> f64 {
    // f64::round is specified to round half-way cases away from zero
    x.round()
}

/// clamp(round((x − μ)/s), −2^{n−1}, 2^{n−1} − 1)
pub fn quantize(x: f64, qp: &QuantParams) -> i64 {
    let q = round_half_away((x - qp.offset) / qp.scale);
    if q < qp.q_min() as f64 {
        qp.q_min()
    } else if q > qp.q_max() as f64 {
        qp.q_max()
    } else {
        q as i64
    }
}

/// μ + q·s
pub fn dequantize(q: i64, qp: &QuantParams) -> f64 {
    qp.offset + q as f64 * qp.scale
}

/// Round a positive scale up to the next power of two: 2^⌈log2 s⌉.
pub fn pow2_round_scalar(s: f64) -> f64 {
    assert!(s > 0.0, "pow2 rounding needs a positive scale");
    let mut e = s.log2().ceil() as i32;
    // guard the ceil against representation error on exact powers of two
    while 2f64.powi(e - 1) >= s {
        e -= 1;
    }
    while 2f64.powi(e) < s {
        e += 1;
    }
    2f64.powi(e)
}

/// Gradient of the fake-quantized value w.r.t. log2 t under the
/// straight-through estimator, with the effective scale s = 2^⌈log2 t⌉.
///
/// Interior: s·ln2·(round(x/s) − x/s); saturated low: −s·ln2·2^{b−1};
/// saturated high: s·ln2·(2^{b−1} − 1). The saturated branches are the exact
/// derivatives of the smooth clamped value s·q_bound.
pub fn ste_grad_log2t(x: f64, t: f64, b: u32) -> Result<f64> {
    if !t.is_finite() || t <= 0.0 {
        return Err(QuantError::Domain(format!(
            "scale parameter t must be > 0, got {t}"
        )));
    }
    if !(2..=31).contains(&b) {
        return Err(QuantError::Domain(format!("bits must be in 2..=31, got {b}")));
    }
    let s = pow2_round_scalar(t);
    let lo = -((1i64 << (b - 1)) as f64);
    let hi = ((1i64 << (b - 1)) - 1) as f64;
    let z = x / s;
    let ln2 = std::f64::consts::LN_2;
    let g = if z < lo {
        s * ln2 * lo
    } else if z > hi {
        s * ln2 * hi
    } else {
        s * ln2 * (round_half_away(z) - z)
    };
    Ok(g)
}
