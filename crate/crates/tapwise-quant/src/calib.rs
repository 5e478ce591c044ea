use serde::{Deserialize, Serialize};
use tensor_io::{Layout, Tensor};
use winograd_core::TransformSet;

use crate::quantizer::pow2_round_scalar;
use crate::{QuantError, Result};

/// Which side of the pipeline a tap-scale matrix rescales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleRole {
    /// Input feature map taps (divides BᵀxB).
    SB,
    /// Weight taps (divides GfGᵀ).
    SG,
    /// Elementwise product S_B ⊙ S_G applied once before back-transformation.
    SBG,
}

/// t×t positive per-tap scale factors.
#[derive(Debug, Clone, PartialEq)]
pub struct TapScaleMatrix {
    t: usize,
    values: Vec<f64>,
    pow2: bool,
    role: ScaleRole,
}

impl TapScaleMatrix {
    pub fn new(t: usize, values: Vec<f64>, role: ScaleRole) -> Result<Self> {
        if values.len() != t * t {
            return Err(QuantError::Config(format!(
                "tap scale matrix needs {}x{} = {} entries, got {}",
                t,
                t,
                t * t,
                values.len()
            )));
        }
        if values.iter().any(|&v| !v.is_finite() || v <= 0.0) {
            return Err(QuantError::Config("tap scales must all be > 0".into()));
        }
        let pow2 = values.iter().all(|&v| is_pow2(v));
        Ok(TapScaleMatrix {
            t,
            values,
            pow2,
            role,
        })
    }

    pub fn uniform(t: usize, scale: f64, role: ScaleRole) -> Result<Self> {
        TapScaleMatrix::new(t, vec![scale; t * t], role)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn role(&self) -> ScaleRole {
        self.role
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.t + j]
    }

    pub fn is_pow2(&self) -> bool {
        self.pow2
    }

    /// Each entry replaced by 2^⌈log2 s⌉ (idempotent, never decreases).
    pub fn pow2_round(&self) -> TapScaleMatrix {
        let values = self.values.iter().map(|&v| pow2_round_scalar(v)).collect();
        TapScaleMatrix {
            t: self.t,
            values,
            pow2: true,
            role: self.role,
        }
    }

    /// Per-tap log2 shifts; only meaningful for pow2 matrices.
    pub fn log2_shifts(&self) -> Result<Vec<i32>> {
        if !self.pow2 {
            return Err(QuantError::Config(
                "log2 shifts are only defined for pow2 scale matrices".into(),
            ));
        }
        Ok(self.values.iter().map(|&v| v.log2().round() as i32).collect())
    }

    /// Elementwise product, used to build S_BG = S_B ⊙ S_G.
    pub fn elementwise_product(&self, other: &TapScaleMatrix, role: ScaleRole) -> Result<Self> {
        if self.t != other.t {
            return Err(QuantError::Config("tap scale sizes differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        TapScaleMatrix::new(self.t, values, role)
    }

    /// Serialize as an f64 MATRIX tensor.
    pub fn to_tensor(&self) -> Tensor {
        Tensor::from_f64(vec![self.t, self.t], Layout::Matrix, self.values.clone())
            .expect("t*t values by construction")
    }

    pub fn from_tensor(t: &Tensor, role: ScaleRole) -> Result<Self> {
        if t.layout() != Layout::Matrix || t.shape().len() != 2 || t.shape()[0] != t.shape()[1] {
            return Err(QuantError::Config(format!(
                "scale tensor must be a square MATRIX, got {:?} {:?}",
                t.layout(),
                t.shape()
            )));
        }
        let side = t.shape()[0];
        TapScaleMatrix::new(side, t.to_f64_vec(), role)
    }
}

fn is_pow2(v: f64) -> bool {
    v > 0.0 && v.log2().fract() == 0.0
}

/// Per-tap running maxima used to calibrate scale factors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibState {
    t: usize,
    maxima: Vec<f64>,
    decay: f64,
    count: u64,
}

impl CalibState {
    pub fn new(t: usize, decay: f64) -> Result<Self> {
        if !decay.is_finite() || decay <= 0.0 || decay > 1.0 {
            return Err(QuantError::Domain(format!(
                "decay must be in (0, 1], got {decay}"
            )));
        }
        Ok(CalibState {
            t,
            maxima: vec![0.0; t * t],
            decay,
            count: 0,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn maxima(&self) -> &[f64] {
        &self.maxima
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Running-average update from one batch's per-tap absolute maxima.
    /// The first observation initializes the maxima directly.
    pub fn update_with_maxima(&mut self, batch_max: &[f64]) -> Result<()> {
        if batch_max.len() != self.t * self.t {
            return Err(QuantError::Config(format!(
                "expected {} per-tap maxima, got {}",
                self.t * self.t,
                batch_max.len()
            )));
        }
        if self.count == 0 {
            self.maxima.copy_from_slice(batch_max);
        } else {
            for (m, &b) in self.maxima.iter_mut().zip(batch_max) {
                *m = self.decay * *m + (1.0 - self.decay) * b;
            }
        }
        self.count += 1;
        Ok(())
    }

    /// Update from a taps-major tensor (⟨tap, N, C1, tileH, tileW, C0⟩).
    /// An empty batch is a no-op.
    pub fn update_taps(&mut self, taps: &Tensor) -> Result<()> {
        if taps.layout() != Layout::WinoTaps {
            return Err(QuantError::Config(format!(
                "calibration expects a WINO_TAPS tensor, got {:?}",
                taps.layout()
            )));
        }
        let n_taps = taps.shape()[0];
        if n_taps != self.t * self.t {
            return Err(QuantError::Config(format!(
                "tap count mismatch: state expects {}, tensor has {}",
                self.t * self.t,
                n_taps
            )));
        }
        let per_tap: usize = taps.shape()[1..].iter().product();
        if per_tap == 0 {
            return Ok(());
        }
        let data = taps.to_f64_vec();
        let batch_max: Vec<f64> = (0..n_taps)
            .map(|tap| {
                data[tap * per_tap..(tap + 1) * per_tap]
                    .iter()
                    .fold(0.0f64, |a, &v| a.max(v.abs()))
            })
            .collect();
        self.update_with_maxima(&batch_max)
    }

    /// Observe weight taps GfGᵀ of every (c_out, c_in) kernel.
    pub fn update_weight_taps(&mut self, weights: &Tensor, ts: &TransformSet) -> Result<()> {
        let shape = weights.shape();
        if shape.len() != 4 || shape[2] != 3 || shape[3] != 3 {
            return Err(QuantError::Config(format!(
                "weights must be [C_out, C_in, 3, 3], got {shape:?}"
            )));
        }
        let (co, ci) = (shape[0], shape[1]);
        if co * ci == 0 {
            return Ok(());
        }
        let w = weights.to_f64_vec();
        let t = ts.t();
        let mut batch_max = vec![0.0f64; t * t];
        for k in 0..co * ci {
            let f = winograd_core::Mat::from_flat(3, 3, w[k * 9..(k + 1) * 9].to_vec());
            let fw = winograd_core::weight_transform_f64(ts, &f)?;
            for i in 0..t {
                for j in 0..t {
                    let v = fw[(i, j)].abs();
                    if v > batch_max[i * t + j] {
                        batch_max[i * t + j] = v;
                    }
                }
            }
        }
        self.update_with_maxima(&batch_max)
    }

    /// Per-tap scales s = max / 2^{n−1}; dead taps (zero maxima) are floored
    /// at 2^{−n} so downstream divisions stay defined.
    pub fn scales_from_maxima(&self, n: u32, role: ScaleRole) -> Result<TapScaleMatrix> {
        let denom = (1u64 << (n - 1)) as f64;
        let floor = 2f64.powi(-(n as i32));
        let values = self
            .maxima
            .iter()
            .map(|&m| if m > 0.0 { m / denom } else { floor })
            .collect();
        TapScaleMatrix::new(self.t, values, role)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_batch_initializes_directly() {
        let mut st = CalibState::new(2, 0.9).unwrap();
        st.update_with_maxima(&[4.0, 1.0, 2.0, 0.5]).unwrap();
        assert_eq!(st.maxima()[0], 4.0);
        assert_eq!(st.count(), 1);
    }

    #[test]
    fn decayed_update_matches_hand_arithmetic() {
        let mut st = CalibState::new(1, 0.9).unwrap();
        st.update_with_maxima(&[4.0]).unwrap();
        st.update_with_maxima(&[2.0]).unwrap();
        assert!((st.maxima()[0] - 3.8).abs() < 1e-15);
    }

    #[test]
    fn all_zero_batch_decays_toward_zero() {
        let mut st = CalibState::new(1, 0.9).unwrap();
        st.update_with_maxima(&[1.0]).unwrap();
        st.update_with_maxima(&[0.0]).unwrap();
        assert!((st.maxima()[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn empty_batch_is_a_noop() {
        let mut st = CalibState::new(6, 0.9).unwrap();
        let empty = Tensor::zeros(
            vec![36, 0, 1, 1, 1, 32],
            Layout::WinoTaps,
            tensor_io::Dtype::F64,
        )
        .unwrap();
        st.update_taps(&empty).unwrap();
        assert_eq!(st.count(), 0);
    }

    #[test]
    fn scales_from_maxima_examples() {
        let mut st = CalibState::new(2, 0.9).unwrap();
        st.update_with_maxima(&[128.0, 0.0, 64.0, 32.0]).unwrap();
        let s = st.scales_from_maxima(8, ScaleRole::SB).unwrap();
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.get(0, 1), 2f64.powi(-8)); // dead-tap floor
        assert_eq!(s.get(1, 0), 0.5);
    }

    #[test]
    fn pow2_matrix_flags_and_shifts() {
        let s = TapScaleMatrix::new(2, vec![0.3, 1.0, 5.0, 0.25], ScaleRole::SG).unwrap();
        assert!(!s.is_pow2());
        let p = s.pow2_round();
        assert!(p.is_pow2());
        assert_eq!(p.values(), &[0.5, 1.0, 8.0, 0.25]);
        assert_eq!(p.log2_shifts().unwrap(), vec![-1, 0, 3, -2]);
        // idempotent
        assert_eq!(p.pow2_round().values(), p.values());
    }

    #[test]
    fn invalid_scales_rejected() {
        assert!(TapScaleMatrix::new(2, vec![1.0; 3], ScaleRole::SB).is_err());
        assert!(TapScaleMatrix::new(1, vec![0.0], ScaleRole::SB).is_err());
        assert!(CalibState::new(4, 0.0).is_err());
    }

    #[test]
    fn sbg_is_elementwise_product() {
        let sb = TapScaleMatrix::new(1, vec![0.5], ScaleRole::SB).unwrap();
        let sg = TapScaleMatrix::new(1, vec![4.0], ScaleRole::SG).unwrap();
        let sbg = sb.elementwise_product(&sg, ScaleRole::SBG).unwrap();
        assert_eq!(sbg.values(), &[2.0]);
    }
}
