use crate::tensor::row_major_strides;
use crate::{Dtype, Dyadic, Layout, Result, Tensor, TensorData, TensorError};

/// Channel sub-block width of the fractal layout ⟨N, C1, H, W, C0⟩.
pub const FRACTAL_C0: usize = 32;

fn scatter<T: Copy + Default>(src: &[T], n: usize, c: usize, h: usize, w: usize) -> Vec<T> {
    let c1 = c.div_ceil(FRACTAL_C0);
    let mut dst = vec![T::default(); n * c1 * h * w * FRACTAL_C0];
    let is = row_major_strides(&[n, c, h, w]);
    let os = row_major_strides(&[n, c1, h, w, FRACTAL_C0]);
    for ni in 0..n {
        for ci in 0..c {
            for hi in 0..h {
                for wi in 0..w {
                    let s = ni * is[0] + ci * is[1] + hi * is[2] + wi * is[3];
                    let d = ni * os[0]
                        + (ci / FRACTAL_C0) * os[1]
                        + hi * os[2]
                        + wi * os[3]
                        + ci % FRACTAL_C0;
                    dst[d] = src[s];
                }
            }
        }
    }
    dst
}

fn gather<T: Copy + Default>(
    src: &[T],
    n: usize,
    c1: usize,
    h: usize,
    w: usize,
    c: usize,
) -> Vec<T> {
    let mut dst = vec![T::default(); n * c * h * w];
    let is = row_major_strides(&[n, c1, h, w, FRACTAL_C0]);
    let os = row_major_strides(&[n, c, h, w]);
    for ni in 0..n {
        for ci in 0..c {
            for hi in 0..h {
                for wi in 0..w {
                    let s = ni * is[0]
                        + (ci / FRACTAL_C0) * is[1]
                        + hi * is[2]
                        + wi * is[3]
                        + ci % FRACTAL_C0;
                    let d = ni * os[0] + ci * os[1] + hi * os[2] + wi * os[3];
                    dst[d] = src[s];
                }
            }
        }
    }
    dst
}

/// Split the channel dimension of an NCHW tensor into (C1, C0) blocks of 32.
///
/// Channels beyond C are zero-filled; element (n, c, h, w) lands at
/// (n, c / 32, h, w, c % 32).
pub fn nchw_to_fractal(t: &Tensor) -> Result<Tensor> {
    if t.layout() != Layout::Nchw || t.shape().len() != 4 {
        return Err(TensorError::shape(format!(
            "nchw_to_fractal expects a 4-D NCHW tensor, got {:?} {:?}",
            t.layout(),
            t.shape()
        )));
    }
    let [n, c, h, w] = [t.shape()[0], t.shape()[1], t.shape()[2], t.shape()[3]];
    let c1 = c.div_ceil(FRACTAL_C0);
    let shape = vec![n, c1, h, w, FRACTAL_C0];
    let data = match t.data() {
        TensorData::F64(v) => TensorData::F64(scatter(v, n, c, h, w)),
        TensorData::I8(v) => TensorData::I8(scatter(v, n, c, h, w)),
        TensorData::I16(v) => TensorData::I16(scatter(v, n, c, h, w)),
        TensorData::I32(v) => TensorData::I32(scatter(v, n, c, h, w)),
        TensorData::Rational(v) => TensorData::Rational(scatter(v, n, c, h, w)),
    };
    Tensor::new(shape, Layout::Fractal, data)
}

/// Inverse of [`nchw_to_fractal`], keeping the first `c` channels.
pub fn fractal_to_nchw(t: &Tensor, c: usize) -> Result<Tensor> {
    if t.layout() != Layout::Fractal || t.shape().len() != 5 {
        return Err(TensorError::shape(format!(
            "fractal_to_nchw expects a 5-D fractal tensor, got {:?} {:?}",
            t.layout(),
            t.shape()
        )));
    }
    let [n, c1, h, w] = [t.shape()[0], t.shape()[1], t.shape()[2], t.shape()[3]];
    if c > c1 * FRACTAL_C0 {
        return Err(TensorError::shape(format!(
            "requested {} channels but fractal tensor holds only {}",
            c,
            c1 * FRACTAL_C0
        )));
    }
    let shape = vec![n, c, h, w];
    let data = match t.data() {
        TensorData::F64(v) => TensorData::F64(gather(v, n, c1, h, w, c)),
        TensorData::I8(v) => TensorData::I8(gather(v, n, c1, h, w, c)),
        TensorData::I16(v) => TensorData::I16(gather(v, n, c1, h, w, c)),
        TensorData::I32(v) => TensorData::I32(gather(v, n, c1, h, w, c)),
        TensorData::Rational(v) => TensorData::Rational(gather(v, n, c1, h, w, c)),
    };
    Tensor::new(shape, Layout::Nchw, data)
}

/// Dyadic tensor from plain integers.
pub fn from_ints(shape: Vec<usize>, layout: Layout, ints: &[i64]) -> Result<Tensor> {
    let data: Vec<Dyadic> = ints.iter().map(|&v| Dyadic::from_int(v)).collect();
    Tensor::new(shape, layout, TensorData::Rational(data))
}

/// Dtype-preserving empty NCHW tensor (degenerate extent).
pub fn empty_nchw(n: usize, h: usize, w: usize, dtype: Dtype) -> Result<Tensor> {
    Tensor::zeros(vec![n, 0, h, w], Layout::Nchw, dtype)
}
