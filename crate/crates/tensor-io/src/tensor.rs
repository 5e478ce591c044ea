use serde::{Deserialize, Serialize};

use crate::{Result, TensorError, FRACTAL_C0};

/// Memory layout of a tensor's flat buffer (row-major in the listed order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// 4-D ⟨N, C, H, W⟩.
    Nchw,
    /// 5-D ⟨N, C1, H, W, C0⟩ with C0 == 32.
    Fractal,
    /// Plain 2-D matrix ⟨rows, cols⟩.
    Matrix,
    /// Taps-major transform output ⟨tap, N, C1, tileH, tileW, C0⟩.
    WinoTaps,
}

impl Layout {
    pub fn expected_ndim(self) -> usize {
        match self {
            Layout::Nchw => 4,
            Layout::Fractal => 5,
            Layout::Matrix => 2,
            Layout::WinoTaps => 6,
        }
    }
}

/// Element type of a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F64,
    I8,
    I16,
    I32,
    Rational,
}

impl Dtype {
    pub fn elem_size(self) -> usize {
        match self {
            Dtype::F64 => 8,
            Dtype::I8 => 1,
            Dtype::I16 => 2,
            Dtype::I32 => 4,
            Dtype::Rational => 16,
        }
    }
}

impl std::fmt::Display for Dtype {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Dtype::F64 => "f64",
            Dtype::I8 => "i8",
            Dtype::I16 => "i16",
            Dtype::I32 => "i32",
            Dtype::Rational => "rational",
        };
        write!(f, "{s}")
    }
}

/// Exact dyadic rational: `num / 2^exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dyadic {
    pub num: i64,
    /// Power-of-two denominator exponent; may be negative (then the value is
    /// `num * 2^|exp|`).
    pub exp: i64,
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::from_int(0)
    }
}

impl Dyadic {
    pub fn new(num: i64, exp: i64) -> Self {
        Dyadic { num, exp }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic { num: v, exp: 0 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 * 2f64.powi(-self.exp as i32)
    }
}

/// Flat element storage, one variant per dtype.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    F64(Vec<f64>),
    I8(Vec<i8>),
    I16(Vec<i16>),
    I32(Vec<i32>),
    Rational(Vec<Dyadic>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            TensorData::F64(v) => v.len(),
            TensorData::I8(v) => v.len(),
            TensorData::I16(v) => v.len(),
            TensorData::I32(v) => v.len(),
            TensorData::Rational(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            TensorData::F64(_) => Dtype::F64,
            TensorData::I8(_) => Dtype::I8,
            TensorData::I16(_) => Dtype::I16,
            TensorData::I32(_) => Dtype::I32,
            TensorData::Rational(_) => Dtype::Rational,
        }
    }
}

/// N-dimensional numeric container with a declared layout.
///
/// Invariants are checked at construction: the element count matches the
/// shape product, the layout's dimensionality matches, and the fractal
/// layout carries C0 == 32.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    layout: Layout,
    data: TensorData,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, layout: Layout, data: TensorData) -> Result<Self> {
        let count: usize = shape.iter().product();
        if count != data.len() {
            return Err(TensorError::shape(format!(
                "shape {:?} holds {} elements but buffer has {}",
                shape,
                count,
                data.len()
            )));
        }
        if shape.len() != layout.expected_ndim() {
            return Err(TensorError::shape(format!(
                "layout {:?} expects {} dims, shape {:?} has {}",
                layout,
                layout.expected_ndim(),
                shape,
                shape.len()
            )));
        }
        if layout == Layout::Fractal && shape[4] != FRACTAL_C0 {
            return Err(TensorError::shape(format!(
                "fractal layout requires C0 == {}, got {}",
                FRACTAL_C0, shape[4]
            )));
        }
        if layout == Layout::WinoTaps && shape[5] != FRACTAL_C0 {
            return Err(TensorError::shape(format!(
                "taps-major layout requires C0 == {}, got {}",
                FRACTAL_C0, shape[5]
            )));
        }
        Ok(Tensor {
            shape,
            layout,
            data,
        })
    }

    pub fn from_f64(shape: Vec<usize>, layout: Layout, data: Vec<f64>) -> Result<Self> {
        Tensor::new(shape, layout, TensorData::F64(data))
    }

    pub fn from_i8(shape: Vec<usize>, layout: Layout, data: Vec<i8>) -> Result<Self> {
        Tensor::new(shape, layout, TensorData::I8(data))
    }

    pub fn from_i32(shape: Vec<usize>, layout: Layout, data: Vec<i32>) -> Result<Self> {
        Tensor::new(shape, layout, TensorData::I32(data))
    }

    pub fn zeros(shape: Vec<usize>, layout: Layout, dtype: Dtype) -> Result<Self> {
        let n: usize = shape.iter().product();
        let data = match dtype {
            Dtype::F64 => TensorData::F64(vec![0.0; n]),
            Dtype::I8 => TensorData::I8(vec![0; n]),
            Dtype::I16 => TensorData::I16(vec![0; n]),
            Dtype::I32 => TensorData::I32(vec![0; n]),
            Dtype::Rational => TensorData::Rational(vec![Dyadic::from_int(0); n]),
        };
        Tensor::new(shape, layout, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dtype(&self) -> Dtype {
        self.data.dtype()
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_f64(&self) -> Option<&[f64]> {
        match &self.data {
            TensorData::F64(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_i8(&self) -> Option<&[i8]> {
        match &self.data {
            TensorData::I8(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_i32(&self) -> Option<&[i32]> {
        match &self.data {
            TensorData::I32(v) => Some(v),
            _ => None,
        }
    }

    /// Copy of the buffer widened to f64. Rational elements are converted
    /// exactly when the exponent is within f64 range.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.data {
            TensorData::F64(v) => v.clone(),
            TensorData::I8(v) => v.iter().map(|&x| x as f64).collect(),
            TensorData::I16(v) => v.iter().map(|&x| x as f64).collect(),
            TensorData::I32(v) => v.iter().map(|&x| x as f64).collect(),
            TensorData::Rational(v) => v.iter().map(|d| d.to_f64()).collect(),
        }
    }

    /// Integer view of the buffer; fails for f64/rational tensors with
    /// non-integral values.
    pub fn to_i64_vec(&self) -> Result<Vec<i64>> {
        match &self.data {
            TensorData::I8(v) => Ok(v.iter().map(|&x| x as i64).collect()),
            TensorData::I16(v) => Ok(v.iter().map(|&x| x as i64).collect()),
            TensorData::I32(v) => Ok(v.iter().map(|&x| x as i64).collect()),
            TensorData::F64(v) => v
                .iter()
                .map(|&x| {
                    if x.fract() == 0.0 && x.abs() < 2f64.powi(53) {
                        Ok(x as i64)
                    } else {
                        Err(TensorError::shape(format!("non-integral f64 value {x}")))
                    }
                })
                .collect(),
            TensorData::Rational(v) => v
                .iter()
                .map(|d| {
                    if d.exp <= 0 {
                        Ok(d.num << (-d.exp) as u32)
                    } else if d.num % (1i64 << d.exp.min(62)) == 0 {
                        Ok(d.num >> d.exp as u32)
                    } else {
                        Err(TensorError::shape("non-integral rational value"))
                    }
                })
                .collect(),
        }
    }

    /// Row-major strides for the declared shape.
    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.shape)
    }

    /// Flat offset of a multi-index.
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter()
            .zip(self.strides())
            .map(|(i, s)| i * s)
            .sum()
    }
}

pub(crate) fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    strides
}
