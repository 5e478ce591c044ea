use serde::{Deserialize, Serialize};

use crate::{Result, TensorError};

/// Border handling for a Conv2D workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    /// Zero padding keeps the output the same spatial size (k=3, s=1).
    Same,
    /// No padding; output shrinks by k − 1.
    Valid,
}

/// Conv2D workload descriptor.
///
/// `h` and `w` are the output spatial dims: the sizes natural to throughput
/// accounting. Winograd paths require k == 3 and stride == 1; im2col accepts
/// k ∈ {1, 3, 5, 7} and stride ∈ {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub batch: usize,
    pub h: usize,
    pub w: usize,
    pub c_in: usize,
    pub c_out: usize,
    #[serde(default = "default_kernel")]
    pub kernel: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_padding")]
    pub padding: Padding,
}

fn default_kernel() -> usize {
    3
}
fn default_stride() -> usize {
    1
}
fn default_padding() -> Padding {
    Padding::Same
}

impl LayerShape {
    /// 3×3 stride-1 layer, the shape class Winograd applies to.
    pub fn conv3x3(batch: usize, h: usize, w: usize, c_in: usize, c_out: usize) -> Self {
        LayerShape {
            batch,
            h,
            w,
            c_in,
            c_out,
            kernel: 3,
            stride: 1,
            padding: Padding::Same,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 || self.h == 0 || self.w == 0 || self.c_in == 0 || self.c_out == 0 {
            return Err(TensorError::shape(format!(
                "layer extents must all be >= 1, got {self:?}"
            )));
        }
        if !matches!(self.kernel, 1 | 3 | 5 | 7) {
            return Err(TensorError::shape(format!(
                "unsupported kernel size {}",
                self.kernel
            )));
        }
        if !matches!(self.stride, 1 | 2) {
            return Err(TensorError::shape(format!(
                "unsupported stride {}",
                self.stride
            )));
        }
        Ok(())
    }

    pub fn winograd_eligible(&self) -> bool {
        self.kernel == 3 && self.stride == 1
    }

    /// MACs of the direct (spatial) algorithm.
    pub fn spatial_macs(&self) -> u64 {
        self.batch as u64
            * self.h as u64
            * self.w as u64
            * self.c_in as u64
            * self.c_out as u64
            * (self.kernel * self.kernel) as u64
    }
}
