use tensor_io::{Layout, Padding, Tensor};
use winograd_core::{Mat, TransformKind, TransformSet};

use crate::calib::{ScaleRole, TapScaleMatrix};
use crate::{QuantError, Result};

/// How the ⊘ S divisions inside the quantizers are carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescaleBackend {
    /// IEEE f64 division; accepts arbitrary positive scales.
    Float,
    /// Exact rational division against the scale's exact binary value
    /// (the reference for bit-exactness claims).
    ExactDiv,
    /// Shift-with-rounding realization; requires power-of-two scales. The
    /// odd residue of the transform denominator (9 for the F4 weight path)
    /// is fused into the single rounding division.
    Shift,
}

/// Integer Winograd convolution with tap-wise rescaling.
///
/// Per tile and input channel the already-quantized spatial operands are
/// transformed, divided by the tap scales and requantized to `b` bits, the
/// tapwise products are accumulated over input channels in 32-bit integers,
/// and the accumulator is rescaled once by S_BG before the back
/// transformation. Output is f64; callers may requantize with a layer scale.
#[allow(clippy::too_many_arguments)]
pub fn quantized_winograd_conv2d(
    x: &Tensor,
    w: &Tensor,
    ts: &TransformSet,
    s_b: &TapScaleMatrix,
    s_g: &TapScaleMatrix,
    b: u32,
    padding: Padding,
    backend: RescaleBackend,
) -> Result<Tensor> {
    if !(2..=15).contains(&b) {
        return Err(QuantError::Config(format!(
            "winograd-domain bits b must be in 2..=15, got {b}"
        )));
    }
    let t = ts.t();
    if s_b.t() != t || s_g.t() != t {
        return Err(QuantError::Config(format!(
            "scale matrices must be {t}×{t} for this transform set"
        )));
    }
    if backend == RescaleBackend::Shift && !(s_b.is_pow2() && s_g.is_pow2()) {
        return Err(QuantError::Config(
            "shift backend requires power-of-two scale matrices".into(),
        ));
    }
    for s in s_b.values().iter().chain(s_g.values()) {
        // keeps the exact-arithmetic shifts inside the i128 headroom
        if !(2f64.powi(-60)..=2f64.powi(60)).contains(s) {
            return Err(QuantError::Config(format!(
                "tap scale {s:e} outside the supported range [2^-60, 2^60]"
            )));
        }
    }

    let x = match x.layout() {
        Layout::Nchw => x.clone(),
        Layout::Fractal => tensor_io::fractal_to_nchw(x, w.shape()[1])?,
        other => {
            return Err(QuantError::Config(format!(
                "input must be NCHW or fractal, got {other:?}"
            )))
        }
    };
    let (n, c, h, wd) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
    let (co, ci, kh, kw) = (w.shape()[0], w.shape()[1], w.shape()[2], w.shape()[3]);
    if (kh, kw) != (3, 3) {
        return Err(QuantError::Config(format!(
            "kernel must be 3×3, got {kh}×{kw}"
        )));
    }
    if ci != c {
        return Err(QuantError::Config(format!(
            "input has {c} channels, weights expect {ci}"
        )));
    }
    let xd = x.to_i64_vec().map_err(QuantError::Tensor)?;
    let wdv = w.to_i64_vec().map_err(QuantError::Tensor)?;

    let m = ts.m();
    let pad = match padding {
        Padding::Same => 1usize,
        Padding::Valid => 0,
    };
    let oh = h + 2 * pad - 2;
    let ow = wd + 2 * pad - 2;
    let tiles_h = oh.div_ceil(m);
    let tiles_w = ow.div_ceil(m);

    let (bt_i, bt_den) = ts.integer_scaled(TransformKind::Input);
    let (g_i, g_den) = ts.integer_scaled(TransformKind::Weight);
    let q_lo = -(1i64 << (b - 1));
    let q_hi = (1i64 << (b - 1)) - 1;

    // quantized weight taps, reused across tiles
    let mut qw = vec![0i32; co * c * t * t];
    for k in 0..co * c {
        let f = Mat::from_flat(3, 3, wdv[k * 9..(k + 1) * 9].to_vec());
        match backend {
            RescaleBackend::Float => {
                let fw = ts.g_f64().matmul(&f.map(|v| v as f64)).matmul(&ts.g_f64().transpose());
                for tap in 0..t * t {
                    let q = quant_f64(fw[(tap / t, tap % t)] / s_g.values()[tap], q_lo, q_hi);
                    qw[k * t * t + tap] = q as i32;
                }
            }
            RescaleBackend::ExactDiv | RescaleBackend::Shift => {
                let fw = g_i.matmul(&f).matmul(&g_i.transpose());
                let den0 = g_den as i128 * g_den as i128;
                for tap in 0..t * t {
                    let v = fw[(tap / t, tap % t)] as i128;
                    let q = quant_exact(v, den0, s_g.values()[tap], q_lo, q_hi, backend)?;
                    qw[k * t * t + tap] = q as i32;
                }
            }
        }
    }

    let mut out = vec![0.0f64; n * co * oh * ow];
    let mut tile = Mat::<i64>::zeros(t, t);
    let mut qx = vec![0i32; c * t * t];
    let bt_den0 = bt_den as i128 * bt_den as i128;
    let at = ts.at_f64();

    for ni in 0..n {
        for th in 0..tiles_h {
            for tw in 0..tiles_w {
                // input taps for every channel of this tile
                for cc in 0..c {
                    for dy in 0..t {
                        for dx in 0..t {
                            let iy = (th * m + dy) as isize - pad as isize;
                            let ix = (tw * m + dx) as isize - pad as isize;
                            tile[(dy, dx)] =
                                if iy < 0 || ix < 0 || iy >= h as isize || ix >= wd as isize {
                                    0
                                } else {
                                    xd[((ni * c + cc) * h + iy as usize) * wd + ix as usize]
                                };
                        }
                    }
                    match backend {
                        RescaleBackend::Float => {
                            let xw = ts.bt_f64().sandwich(&tile.map(|v| v as f64));
                            for tap in 0..t * t {
                                let q = quant_f64(
                                    xw[(tap / t, tap % t)] / s_b.values()[tap],
                                    q_lo,
                                    q_hi,
                                );
                                qx[cc * t * t + tap] = q as i32;
                            }
                        }
                        RescaleBackend::ExactDiv | RescaleBackend::Shift => {
                            let xw = bt_i.sandwich(&tile);
                            for tap in 0..t * t {
                                let v = xw[(tap / t, tap % t)] as i128;
                                let q = quant_exact(
                                    v,
                                    bt_den0,
                                    s_b.values()[tap],
                                    q_lo,
                                    q_hi,
                                    backend,
                                )?;
                                qx[cc * t * t + tap] = q as i32;
                            }
                        }
                    }
                }

                for o in 0..co {
                    // int32 accumulation, channel-major then tap
                    let mut acc = vec![0i32; t * t];
                    for cc in 0..c {
                        for tap in 0..t * t {
                            let prod = qx[cc * t * t + tap]
                                .checked_mul(qw[(o * c + cc) * t * t + tap])
                                .ok_or_else(|| {
                                    QuantError::Overflow("tapwise product exceeds i32".into())
                                })?;
                            acc[tap] = acc[tap].checked_add(prod).ok_or_else(|| {
                                QuantError::Overflow("channel accumulation exceeds i32".into())
                            })?;
                        }
                    }
                    // single rescale by S_BG, then back-transformation
                    let mut yw = Mat::<f64>::zeros(t, t);
                    for tap in 0..t * t {
                        let sbg = s_b.values()[tap] * s_g.values()[tap];
                        yw[(tap / t, tap % t)] = acc[tap] as f64 * sbg;
                    }
                    let y = at.matmul(&yw).matmul(&at.transpose());
                    for dy in 0..m {
                        for dx in 0..m {
                            let (py, px) = (th * m + dy, tw * m + dx);
                            if py < oh && px < ow {
                                out[((ni * co + o) * oh + py) * ow + px] = y[(dy, dx)];
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Tensor::from_f64(vec![n, co, oh, ow], Layout::Nchw, out)?)
}

fn quant_f64(v: f64, lo: i64, hi: i64) -> i64 {
    let q = v.round();
    if q < lo as f64 {
        lo
    } else if q > hi as f64 {
        hi
    } else {
        q as i64
    }
}

/// Exact quantization of (v / den0) / scale with round-half-away.
///
/// The scale's exact binary value is used, so this is exact for every f64
/// scale. The shift backend asserts the scale is a power of two and realizes
/// the pow2 factors as shifts of the rounding form; both backends compute
/// the same correctly-rounded result by construction.
fn quant_exact(
    v: i128,
    den0: i128,
    scale: f64,
    lo: i64,
    hi: i64,
    backend: RescaleBackend,
) -> Result<i64> {
    let (sm, se) = decode_f64(scale);
    if sm <= 0 {
        return Err(QuantError::Config("scales must be positive".into()));
    }
    let q = if backend == RescaleBackend::Shift {
        debug_assert_eq!(sm, 1, "shift backend requires pow2 scales");
        // v / (den0 · 2^se): split den0 into its pow2 part and odd residue
        let tz = den0.trailing_zeros() as i64;
        let odd = den0 >> tz;
        let k = se + tz;
        if odd == 1 {
            shift_round_half_away(v, k)
        } else {
            // fused rounding division: the pow2 part via shifts of the
            // doubled numerator, the odd residue exactly
            let num = if k >= 0 { v } else { v << (-k) as u32 };
            let den = if k >= 0 { odd << k as u32 } else { odd };
            div_round_half_away(num, den)
        }
    } else {
        let mut num = v;
        let mut den = den0 * sm as i128;
        if se >= 0 {
            den <<= se as u32;
        } else {
            num <<= (-se) as u32;
        }
        div_round_half_away(num, den)
    };
    Ok(q.clamp(lo as i128, hi as i128) as i64)
}

/// round-half-away(v / 2^k) with shifts; k may be negative (exact multiply).
fn shift_round_half_away(v: i128, k: i64) -> i128 {
    if k <= 0 {
        return v << (-k) as u32;
    }
    let sign = if v < 0 { -1 } else { 1 };
    let mag = v.unsigned_abs();
    let rounded = (mag + (1u128 << (k - 1) as u32)) >> k as u32;
    sign * rounded as i128
}

/// round-half-away(num / den) for den > 0.
fn div_round_half_away(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    if num >= 0 {
        (2 * num + den) / (2 * den)
    } else {
        (2 * num - den) / (2 * den)
    }
}

/// Decompose a finite positive f64 into (mantissa, exponent) with
/// value = mantissa · 2^exponent, mantissa odd.
fn decode_f64(v: f64) -> (i64, i64) {
    assert!(v.is_finite() && v != 0.0);
    let bits = v.to_bits();
    let sign: i64 = if bits >> 63 == 1 { -1 } else { 1 };
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & 0xf_ffff_ffff_ffff) as i64;
    let (mut mant, mut exp) = if raw_exp == 0 {
        (frac, -1074i64)
    } else {
        (frac | (1i64 << 52), raw_exp - 1075)
    };
    while mant & 1 == 0 {
        mant >>= 1;
        exp += 1;
    }
    (sign * mant, exp)
}

/// Convenience: S_BG from the two sides.
pub fn combined_scale(s_b: &TapScaleMatrix, s_g: &TapScaleMatrix) -> Result<TapScaleMatrix> {
    s_b.elementwise_product(s_g, ScaleRole::SBG)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_f64_exact() {
        assert_eq!(decode_f64(1.0), (1, 0));
        assert_eq!(decode_f64(0.5), (1, -1));
        assert_eq!(decode_f64(3.0), (3, 0));
        assert_eq!(decode_f64(-0.75), (-3, -2));
        let (m, e) = decode_f64(0.1);
        assert_eq!(0.1f64, m as f64 * 2f64.powi(e as i32));
    }

    #[test]
    fn rounding_division_half_away() {
        assert_eq!(div_round_half_away(7, 2), 4);
        assert_eq!(div_round_half_away(-7, 2), -4);
        assert_eq!(div_round_half_away(5, 2), 3);
        assert_eq!(div_round_half_away(-5, 2), -3);
        assert_eq!(div_round_half_away(1, 3), 0);
        assert_eq!(div_round_half_away(-1, 3), 0);
        assert_eq!(shift_round_half_away(7, 1), 4);
        assert_eq!(shift_round_half_away(-7, 1), -4);
        assert_eq!(shift_round_half_away(3, -2), 12);
    }

    #[test]
    fn rounding_division_satisfies_the_defining_inequalities() {
        // q = round-half-away(v/d) iff |v − q·d| ≤ d/2, with ties resolved
        // away from zero (|q·d| ≥ |v| on a tie)
        let mut rng = tensor_io::XorShift64Star::new(0xD1F);
        for _ in 0..20000 {
            let v = rng.next_u64() as i64 as i128 % 1_000_000;
            let d = 1 + (rng.next_u64() % 5000) as i128;
            let q = div_round_half_away(v, d);
            let r = v - q * d;
            assert!(2 * r.abs() <= d, "v={v} d={d} q={q}");
            if 2 * r.abs() == d {
                assert!((q * d).abs() >= v.abs(), "tie must round away: v={v} d={d} q={q}");
            }
        }
        // shifts agree with the general division for pow2 denominators
        for _ in 0..5000 {
            let v = rng.next_u64() as i64 as i128 % (1 << 40);
            let k = (rng.next_u64() % 20) as i64;
            assert_eq!(shift_round_half_away(v, k), div_round_half_away(v, 1 << k));
        }
    }
}
