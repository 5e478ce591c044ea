use tensor_io::{fractal_to_nchw, Dyadic, Layout, Padding, Tensor, TensorData};

use crate::matrix::Mat;
use crate::transform::TransformSet;
use crate::{Result, TransformKind, WinogradError};

/// Textbook cross-correlation oracle. Accumulates in f64 or i64 with a fixed
/// loop nest (n, co, oh, ow, ci, kh, kw) so integer outputs are
/// bit-reproducible.
pub fn direct_conv2d(x: &Tensor, w: &Tensor, padding: Padding, stride: usize) -> Result<Tensor> {
    if !matches!(stride, 1 | 2) {
        return Err(WinogradError::UnsupportedWorkload(format!(
            "direct conv supports stride 1 or 2, got {stride}"
        )));
    }
    let x = normalize_input(x, w)?;
    let (n, c, h, wd) = dims4(&x)?;
    let (co, ci, kh, kw) = dims4(w)?;
    if ci != c {
        return Err(WinogradError::DimMismatch(format!(
            "input has {c} channels, weights expect {ci}"
        )));
    }
    let pad = match padding {
        Padding::Same => (kh - 1) / 2,
        Padding::Valid => 0,
    };
    let oh = (h + 2 * pad - kh) / stride + 1;
    let ow = (wd + 2 * pad - kw) / stride + 1;
    let shape = vec![n, co, oh, ow];

    match (&x.data(), &w.data()) {
        (TensorData::F64(xd), TensorData::F64(wd_)) => {
            let out = direct_loop_f64(xd, wd_, n, c, h, wd, co, kh, kw, pad, stride, oh, ow);
            Ok(Tensor::from_f64(shape, Layout::Nchw, out)?)
        }
        _ => {
            let (xi, xe) = scaled_ints(&x)?;
            let (wi, we) = scaled_ints(w)?;
            let out = direct_loop_i64(&xi, &wi, n, c, h, wd, co, kh, kw, pad, stride, oh, ow);
            int_output(shape, out, x.dtype() == tensor_io::Dtype::Rational, xe + we)
        }
    }
}

/// Integer view of a tensor with a common power-of-two denominator factored
/// out: value[i] == ints[i] / 2^exp. Plain integer dtypes have exp == 0;
/// dyadic tensors scale to their largest denominator exponent.
fn scaled_ints(t: &Tensor) -> Result<(Vec<i64>, i64)> {
    if let TensorData::Rational(v) = t.data() {
        let exp = v.iter().map(|d| d.exp).max().unwrap_or(0).max(0);
        let ints = v
            .iter()
            .map(|d| {
                let shift = exp - d.exp;
                if shift > 62 {
                    return Err(WinogradError::Overflow(
                        "dyadic exponent spread too large for the exact path".into(),
                    ));
                }
                d.num.checked_mul(1i64 << shift).ok_or_else(|| {
                    WinogradError::Overflow("dyadic numerator overflow".into())
                })
            })
            .collect::<Result<_>>()?;
        Ok((ints, exp))
    } else {
        Ok((t.to_i64_vec()?, 0))
    }
}

#[allow(clippy::too_many_arguments)]
fn direct_loop_f64(
    x: &[f64],
    w: &[f64],
    n: usize,
    c: usize,
    h: usize,
    wd: usize,
    co: usize,
    kh: usize,
    kw: usize,
    pad: usize,
    stride: usize,
    oh: usize,
    ow: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; n * co * oh * ow];
    for ni in 0..n {
        for o in 0..co {
            for yo in 0..oh {
                for xo in 0..ow {
                    let mut acc = 0.0;
                    for cc in 0..c {
                        for ky in 0..kh {
                            for kx in 0..kw {
                                let iy = (yo * stride + ky) as isize - pad as isize;
                                let ix = (xo * stride + kx) as isize - pad as isize;
                                if iy < 0 || ix < 0 || iy >= h as isize || ix >= wd as isize {
                                    continue;
                                }
                                let xv = x[((ni * c + cc) * h + iy as usize) * wd + ix as usize];
                                let wv = w[((o * c + cc) * kh + ky) * kw + kx];
                                acc += xv * wv;
                            }
                        }
                    }
                    out[((ni * co + o) * oh + yo) * ow + xo] = acc;
                }
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn direct_loop_i64(
    x: &[i64],
    w: &[i64],
    n: usize,
    c: usize,
    h: usize,
    wd: usize,
    co: usize,
    kh: usize,
    kw: usize,
    pad: usize,
    stride: usize,
    oh: usize,
    ow: usize,
) -> Vec<i64> {
    let mut out = vec![0i64; n * co * oh * ow];
    for ni in 0..n {
        for o in 0..co {
            for yo in 0..oh {
                for xo in 0..ow {
                    let mut acc = 0i64;
                    for cc in 0..c {
                        for ky in 0..kh {
                            for kx in 0..kw {
                                let iy = (yo * stride + ky) as isize - pad as isize;
                                let ix = (xo * stride + kx) as isize - pad as isize;
                                if iy < 0 || ix < 0 || iy >= h as isize || ix >= wd as isize {
                                    continue;
                                }
                                let xv = x[((ni * c + cc) * h + iy as usize) * wd + ix as usize];
                                let wv = w[((o * c + cc) * kh + ky) * kw + kx];
                                acc += xv * wv;
                            }
                        }
                    }
                    out[((ni * co + o) * oh + yo) * ow + xo] = acc;
                }
            }
        }
    }
    out
}

/// Tiled Winograd convolution. Kernel must be 3×3 with stride 1; input may be
/// NCHW or fractal. f64 tensors run the IEEE pipeline, integer and rational
/// tensors run the exact pipeline (bit-equal to the direct oracle).
pub fn winograd_conv2d(
    x: &Tensor,
    w: &Tensor,
    ts: &TransformSet,
    padding: Padding,
) -> Result<Tensor> {
    let (co, _ci, kh, kw) = dims4(w)?;
    if kh != 3 || kw != 3 {
        return Err(WinogradError::UnsupportedWorkload(format!(
            "winograd path requires a 3×3 kernel, got {kh}×{kw}"
        )));
    }
    let x = normalize_input(x, w)?;
    let (n, c, h, wd) = dims4(&x)?;
    let (_, ci, _, _) = dims4(w)?;
    if ci != c {
        return Err(WinogradError::DimMismatch(format!(
            "input has {c} channels, weights expect {ci}"
        )));
    }
    let pad = match padding {
        Padding::Same => 1usize,
        Padding::Valid => 0,
    };
    let oh = h + 2 * pad - 2;
    let ow = wd + 2 * pad - 2;
    let shape = vec![n, co, oh, ow];

    match x.data() {
        TensorData::F64(xd) => {
            let wdta = w
                .as_f64()
                .ok_or_else(|| WinogradError::DimMismatch("weights must match input dtype".into()))?;
            let out = wino_f64(ts, xd, wdta, n, c, h, wd, co, pad, oh, ow);
            Ok(Tensor::from_f64(shape, Layout::Nchw, out)?)
        }
        _ => {
            let (xi, xe) = scaled_ints(&x)?;
            let (wi, we) = scaled_ints(w)?;
            let out = wino_exact(ts, &xi, &wi, n, c, h, wd, co, pad, oh, ow)?;
            int_output(
                shape,
                out,
                x.dtype() == tensor_io::Dtype::Rational,
                xe + we,
            )
        }
    }
}

fn int_output(shape: Vec<usize>, vals: Vec<i64>, rational: bool, exp: i64) -> Result<Tensor> {
    if rational {
        let data: Vec<Dyadic> = vals.into_iter().map(|v| Dyadic::new(v, exp)).collect();
        return Ok(Tensor::new(shape, Layout::Nchw, TensorData::Rational(data))?);
    }
    debug_assert_eq!(exp, 0, "integer dtypes carry no denominator");
    let data: Vec<i32> = vals
        .into_iter()
        .map(|v| {
            i32::try_from(v).map_err(|_| WinogradError::Overflow(format!("value {v} exceeds i32")))
        })
        .collect::<Result<_>>()?;
    Ok(Tensor::from_i32(shape, Layout::Nchw, data)?)
}

#[allow(clippy::too_many_arguments)]
fn wino_f64(
    ts: &TransformSet,
    x: &[f64],
    w: &[f64],
    n: usize,
    c: usize,
    h: usize,
    wd: usize,
    co: usize,
    pad: usize,
    oh: usize,
    ow: usize,
) -> Vec<f64> {
    let m = ts.m();
    let t = ts.t();
    let tiles_h = oh.div_ceil(m);
    let tiles_w = ow.div_ceil(m);

    // transformed weights, reused across all tiles
    let gw: Vec<Mat<f64>> = (0..co * c)
        .map(|i| {
            let f = Mat::from_flat(3, 3, w[i * 9..(i + 1) * 9].to_vec());
            ts.g_f64().matmul(&f).matmul(&ts.g_f64().transpose())
        })
        .collect();

    let mut out = vec![0.0; n * co * oh * ow];
    let mut tile = Mat::<f64>::zeros(t, t);
    for ni in 0..n {
        for o in 0..co {
            for th in 0..tiles_h {
                for tw in 0..tiles_w {
                    let mut acc = Mat::<f64>::zeros(t, t);
                    for cc in 0..c {
                        gather_tile_f64(x, &mut tile, ni, cc, c, h, wd, th * m, tw * m, pad);
                        let xw = ts.bt_f64().sandwich(&tile);
                        let fw = &gw[o * c + cc];
                        for i in 0..t {
                            for j in 0..t {
                                acc[(i, j)] += xw[(i, j)] * fw[(i, j)];
                            }
                        }
                    }
                    let y = ts.at_f64().matmul(&acc).matmul(&ts.at_f64().transpose());
                    scatter_tile_f64(&mut out, &y, ni, o, co, oh, ow, th * m, tw * m);
                }
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn gather_tile_f64(
    x: &[f64],
    tile: &mut Mat<f64>,
    ni: usize,
    cc: usize,
    c: usize,
    h: usize,
    wd: usize,
    oy: usize,
    ox: usize,
    pad: usize,
) {
    let t = tile.rows();
    for dy in 0..t {
        for dx in 0..t {
            let iy = (oy + dy) as isize - pad as isize;
            let ix = (ox + dx) as isize - pad as isize;
            tile[(dy, dx)] = if iy < 0 || ix < 0 || iy >= h as isize || ix >= wd as isize {
                0.0
            } else {
                x[((ni * c + cc) * h + iy as usize) * wd + ix as usize]
            };
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn scatter_tile_f64(
    out: &mut [f64],
    y: &Mat<f64>,
    ni: usize,
    o: usize,
    co: usize,
    oh: usize,
    ow: usize,
    oy: usize,
    ox: usize,
) {
    for dy in 0..y.rows() {
        for dx in 0..y.cols() {
            let (py, px) = (oy + dy, ox + dx);
            if py < oh && px < ow {
                out[((ni * co + o) * oh + py) * ow + px] = y[(dy, dx)];
            }
        }
    }
}

/// Exact integer pipeline: integer-scaled transforms, i128 tapwise
/// accumulation, one exact division by the squared denominators at the end.
#[allow(clippy::too_many_arguments)]
fn wino_exact(
    ts: &TransformSet,
    x: &[i64],
    w: &[i64],
    n: usize,
    c: usize,
    h: usize,
    wd: usize,
    co: usize,
    pad: usize,
    oh: usize,
    ow: usize,
) -> Result<Vec<i64>> {
    let m = ts.m();
    let t = ts.t();
    let tiles_h = oh.div_ceil(m);
    let tiles_w = ow.div_ceil(m);

    let (bt_i, bt_d) = ts.integer_scaled(TransformKind::Input);
    let (g_i, g_d) = ts.integer_scaled(TransformKind::Weight);
    let (at_i, at_d) = ts.integer_scaled(TransformKind::Output);
    let divisor: i128 =
        (bt_d as i128) * (bt_d as i128) * (g_d as i128) * (g_d as i128) * (at_d as i128)
            * (at_d as i128);

    let gw: Vec<Mat<i64>> = (0..co * c)
        .map(|i| {
            let f = Mat::from_flat(3, 3, w[i * 9..(i + 1) * 9].to_vec());
            g_i.matmul(&f).matmul(&g_i.transpose())
        })
        .collect();

    let mut out = vec![0i64; n * co * oh * ow];
    let mut tile = Mat::<i64>::zeros(t, t);
    for ni in 0..n {
        for o in 0..co {
            for th in 0..tiles_h {
                for tw in 0..tiles_w {
                    let mut acc = Mat::<i128>::zeros(t, t);
                    for cc in 0..c {
                        for dy in 0..t {
                            for dx in 0..t {
                                let iy = (th * m + dy) as isize - pad as isize;
                                let ix = (tw * m + dx) as isize - pad as isize;
                                tile[(dy, dx)] =
                                    if iy < 0 || ix < 0 || iy >= h as isize || ix >= wd as isize {
                                        0
                                    } else {
                                        x[((ni * c + cc) * h + iy as usize) * wd + ix as usize]
                                    };
                            }
                        }
                        let xw = bt_i.sandwich(&tile);
                        let fw = &gw[o * c + cc];
                        for i in 0..t {
                            for j in 0..t {
                                acc[(i, j)] += xw[(i, j)] as i128 * fw[(i, j)] as i128;
                            }
                        }
                    }
                    // output transform in i128
                    let at128 = at_i.map(|v| v as i128);
                    let y = at128.matmul(&acc).matmul(&at128.transpose());
                    for dy in 0..m {
                        for dx in 0..m {
                            let (py, px) = (th * m + dy, tw * m + dx);
                            if py < oh && px < ow {
                                let v = y[(dy, dx)];
                                if v % divisor != 0 {
                                    return Err(WinogradError::Overflow(
                                        "inexact division in exact winograd path".into(),
                                    ));
                                }
                                let q = v / divisor;
                                out[((ni * co + o) * oh + py) * ow + px] =
                                    i64::try_from(q).map_err(|_| {
                                        WinogradError::Overflow("exact path exceeds i64".into())
                                    })?;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Transform every (m+2)×(m+2) input tile and lay the taps out taps-major:
/// ⟨tap, N, C1, tileH, tileW, C0⟩ (the order the matmul engine consumes).
/// Channels are zero-padded to a multiple of 32.
pub fn winograd_input_taps(x: &Tensor, ts: &TransformSet, padding: Padding) -> Result<Tensor> {
    let x = match x.layout() {
        Layout::Nchw => x.clone(),
        Layout::Fractal => {
            let c = x.shape()[1] * tensor_io::FRACTAL_C0;
            fractal_to_nchw(x, c)?
        }
        other => {
            return Err(WinogradError::UnsupportedWorkload(format!(
                "input taps need NCHW or fractal input, got {other:?}"
            )))
        }
    };
    let (n, c, h, wd) = dims4(&x)?;
    let m = ts.m();
    let t = ts.t();
    let pad = match padding {
        Padding::Same => 1usize,
        Padding::Valid => 0,
    };
    let oh = h + 2 * pad - 2;
    let ow = wd + 2 * pad - 2;
    let tiles_h = oh.div_ceil(m);
    let tiles_w = ow.div_ceil(m);
    let c0 = tensor_io::FRACTAL_C0;
    let c1 = c.div_ceil(c0);

    let xd = x.to_f64_vec();
    let shape = vec![t * t, n, c1, tiles_h, tiles_w, c0];
    let mut out = vec![0.0; shape.iter().product()];
    let strides = tensor_io::Tensor::zeros(shape.clone(), Layout::WinoTaps, tensor_io::Dtype::I8)?
        .strides();

    let mut tile = Mat::<f64>::zeros(t, t);
    for ni in 0..n {
        for cc in 0..c {
            for th in 0..tiles_h {
                for tw in 0..tiles_w {
                    gather_tile_f64(&xd, &mut tile, ni, cc, c, h, wd, th * m, tw * m, pad);
                    let xw = ts.bt_f64().sandwich(&tile);
                    for tap in 0..t * t {
                        let off = tap * strides[0]
                            + ni * strides[1]
                            + (cc / c0) * strides[2]
                            + th * strides[3]
                            + tw * strides[4]
                            + cc % c0;
                        out[off] = xw[(tap / t, tap % t)];
                    }
                }
            }
        }
    }
    Ok(Tensor::from_f64(shape, Layout::WinoTaps, out)?)
}

fn normalize_input(x: &Tensor, w: &Tensor) -> Result<Tensor> {
    match x.layout() {
        Layout::Nchw => Ok(x.clone()),
        Layout::Fractal => {
            let ci = w.shape()[1];
            Ok(fractal_to_nchw(x, ci)?)
        }
        other => Err(WinogradError::UnsupportedWorkload(format!(
            "convolution input must be NCHW or fractal, got {other:?}"
        ))),
    }
}

fn dims4(t: &Tensor) -> Result<(usize, usize, usize, usize)> {
    if t.shape().len() != 4 {
        return Err(WinogradError::DimMismatch(format!(
            "expected 4-D tensor, got {:?}",
            t.shape()
        )));
    }
    Ok((t.shape()[0], t.shape()[1], t.shape()[2], t.shape()[3]))
}

