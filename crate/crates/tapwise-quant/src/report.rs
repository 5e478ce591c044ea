use serde::{Deserialize, Serialize};
use tensor_io::{Layout, Tensor, XorShift64Star};
use winograd_core::{Mat, TransformSet};

use crate::pinv::pseudo_inverse;
use crate::quantizer::round_half_away;
use crate::{QuantError, Result};

/// Granularity at which quantization scales are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Layer,
    Channel,
    Tap,
    ChannelAndTap,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Layer,
        Strategy::Channel,
        Strategy::Tap,
        Strategy::ChannelAndTap,
    ];
}

/// Where the quantization is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Spatial,
    Winograd,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitStats {
    pub gamma: f64,
    pub sigma: f64,
    pub mu: f64,
}

/// Result of the quantization-error study for one strategy × domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    pub strategy: Strategy,
    pub domain: Domain,
    pub n: u32,
    /// log2 of the mean per-element relative error.
    pub mean_log2_rel_error: f64,
    pub units: Vec<UnitStats>,
}

const GAMMA_LO: f64 = 0.5;
const GAMMA_HI: f64 = 8.0;
const GAMMA_STEP: f64 = 0.01;

/// Per-unit offset quantizer study.
///
/// For every quantization unit the mean μ and std σ are computed, γ is
/// grid-searched over [0.5, 8.0] in steps of 0.01 minimizing the summed
/// relative error with s = γσ/2^{n−1} and
/// Quant_{s,μ}(x) = μ + s · round_clamp((x − μ)/s), and the values are
/// quantized with the winning scale. In the Winograd domain the quantized
/// GfGᵀ tiles are mapped back to the spatial domain through the
/// Moore-Penrose inverses before the error is measured.
pub fn quant_error_report(
    weights: &Tensor,
    strategy: Strategy,
    domain: Domain,
    n: u32,
    ts: Option<&TransformSet>,
) -> Result<ErrorReport> {
    let shape = weights.shape();
    if shape.len() != 4 || shape[2] != 3 || shape[3] != 3 {
        return Err(QuantError::Config(format!(
            "weights must be [C_out, C_in, 3, 3], got {shape:?}"
        )));
    }
    let (co, ci) = (shape[0], shape[1]);
    let w = weights.to_f64_vec();

    match domain {
        Domain::Spatial => {
            // values are the raw weights; tap = kernel position
            let unit_of = |k: usize, tap: usize| unit_id(strategy, k / ci, tap, 9);
            let n_units = unit_count(strategy, co, 9);
            let mut units: Vec<Vec<f64>> = vec![Vec::new(); n_units];
            for k in 0..co * ci {
                for tap in 0..9 {
                    units[unit_of(k, tap)].push(w[k * 9 + tap]);
                }
            }
            let fitted: Vec<FittedUnit> = units.iter().map(|v| fit_unit(v, n)).collect();

            // quantize and measure in place
            let mut log_sum = 0.0;
            let mut err_cnt = 0usize;
            for k in 0..co * ci {
                for tap in 0..9 {
                    let u = &fitted[unit_of(k, tap)];
                    let x = w[k * 9 + tap];
                    let q = u.apply(x, n);
                    if x != 0.0 {
                        log_sum += log2_rel_err(q, x);
                        err_cnt += 1;
                    }
                }
            }
            Ok(report(strategy, domain, n, log_sum, err_cnt, fitted))
        }
        Domain::Winograd => {
            let ts = ts.ok_or_else(|| {
                QuantError::Config("winograd-domain report needs a transform set".into())
            })?;
            let t = ts.t();
            let g = ts.g_f64();
            let g_pinv = pseudo_inverse(g);
            let gt_pinv = g_pinv.transpose();

            // transform all kernels
            let tiles: Vec<Mat<f64>> = (0..co * ci)
                .map(|k| {
                    let f = Mat::from_flat(3, 3, w[k * 9..(k + 1) * 9].to_vec());
                    g.matmul(&f).matmul(&g.transpose())
                })
                .collect();

            let unit_of = |k: usize, tap: usize| unit_id(strategy, k / ci, tap, t * t);
            let n_units = unit_count(strategy, co, t * t);
            let mut units: Vec<Vec<f64>> = vec![Vec::new(); n_units];
            for (k, tile) in tiles.iter().enumerate() {
                for tap in 0..t * t {
                    units[unit_of(k, tap)].push(tile[(tap / t, tap % t)]);
                }
            }
            let fitted: Vec<FittedUnit> = units.iter().map(|v| fit_unit(v, n)).collect();

            // quantize tiles, map back to spatial through the pseudoinverse,
            // measure against the original spatial weights
            let mut log_sum = 0.0;
            let mut err_cnt = 0usize;
            for (k, tile) in tiles.iter().enumerate() {
                let mut qt = Mat::<f64>::zeros(t, t);
                for tap in 0..t * t {
                    let u = &fitted[unit_of(k, tap)];
                    qt[(tap / t, tap % t)] = u.apply(tile[(tap / t, tap % t)], n);
                }
                let back = g_pinv.matmul(&qt).matmul(&gt_pinv);
                for ky in 0..3 {
                    for kx in 0..3 {
                        let x = w[k * 9 + ky * 3 + kx];
                        if x != 0.0 {
                            log_sum += log2_rel_err(back[(ky, kx)], x);
                            err_cnt += 1;
                        }
                    }
                }
            }
            Ok(report(strategy, domain, n, log_sum, err_cnt, fitted))
        }
    }
}

fn unit_count(strategy: Strategy, co: usize, taps: usize) -> usize {
    match strategy {
        Strategy::Layer => 1,
        Strategy::Channel => co,
        Strategy::Tap => taps,
        Strategy::ChannelAndTap => co * taps,
    }
}

fn unit_id(strategy: Strategy, co: usize, tap: usize, taps: usize) -> usize {
    match strategy {
        Strategy::Layer => 0,
        Strategy::Channel => co,
        Strategy::Tap => tap,
        Strategy::ChannelAndTap => co * taps + tap,
    }
}

struct FittedUnit {
    gamma: f64,
    sigma: f64,
    mu: f64,
}

impl FittedUnit {
    /// μ + s·round_clamp((x − μ)/s) with s = γσ/2^{n−1}.
    fn apply(&self, x: f64, n: u32) -> f64 {
        if self.sigma == 0.0 || self.gamma == 0.0 {
            // degenerate unit: single representable level after the offset
            return self.mu;
        }
        let s = self.gamma * self.sigma / (1u64 << (n - 1)) as f64;
        let lo = -((1i64 << (n - 1)) as f64);
        let hi = ((1i64 << (n - 1)) - 1) as f64;
        let q = round_half_away((x - self.mu) / s).clamp(lo, hi);
        self.mu + s * q
    }
}

fn fit_unit(values: &[f64], n: u32) -> FittedUnit {
    if values.is_empty() || values.iter().all(|&v| v == 0.0) {
        // all-zero units contribute zero error and are excluded from the fit
        return FittedUnit {
            gamma: 0.0,
            sigma: 0.0,
            mu: 0.0,
        };
    }
    let count = values.len() as f64;
    let mu = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / count;
    let sigma = var.sqrt();
    if sigma == 0.0 {
        return FittedUnit {
            gamma: 0.0,
            sigma,
            mu,
        };
    }

    let steps = ((GAMMA_HI - GAMMA_LO) / GAMMA_STEP).round() as usize;
    let mut best_gamma = GAMMA_LO;
    let mut best_cost = f64::INFINITY;
    for k in 0..=steps {
        let gamma = GAMMA_LO + k as f64 * GAMMA_STEP;
        let unit = FittedUnit { gamma, sigma, mu };
        let mut cost = 0.0;
        for &x in values {
            if x != 0.0 {
                cost += (unit.apply(x, n) - x).abs() / x.abs();
            }
        }
        if cost < best_cost {
            best_cost = cost;
            best_gamma = gamma;
        }
    }
    FittedUnit {
        gamma: best_gamma,
        sigma,
        mu,
    }
}

/// Per-element log2 relative error, floored at 2^−52 so exact
/// reconstructions keep the aggregate finite.
fn log2_rel_err(reconstructed: f64, reference: f64) -> f64 {
    let rel = ((reconstructed - reference).abs() / reference.abs()).max(2f64.powi(-52));
    rel.log2()
}

fn report(
    strategy: Strategy,
    domain: Domain,
    n: u32,
    log_sum: f64,
    err_cnt: usize,
    fitted: Vec<FittedUnit>,
) -> ErrorReport {
    ErrorReport {
        strategy,
        domain,
        n,
        mean_log2_rel_error: if err_cnt == 0 {
            f64::NEG_INFINITY
        } else {
            log_sum / err_cnt as f64
        },
        units: fitted
            .into_iter()
            .map(|u| UnitStats {
                gamma: u.gamma,
                sigma: u.sigma,
                mu: u.mu,
            })
            .collect(),
    }
}

/// Synthetic weight ensemble with a strong per-tap dynamic-range separation:
/// Winograd-domain tiles are drawn Gaussian with tap (i, j) scaled by
/// 2^(i+j), then mapped back to the spatial domain through the Moore-Penrose
/// inverses. Used by the error-analysis fixtures.
pub fn synthetic_tapscaled_weights(
    c_out: usize,
    c_in: usize,
    ts: &TransformSet,
    seed: u64,
) -> Tensor {
    let t = ts.t();
    let g_pinv = pseudo_inverse(ts.g_f64());
    let gt_pinv = g_pinv.transpose();
    let mut rng = XorShift64Star::new(seed);
    let mut data = Vec::with_capacity(c_out * c_in * 9);
    for _ in 0..c_out * c_in {
        let mut tile = Mat::<f64>::zeros(t, t);
        for i in 0..t {
            for j in 0..t {
                tile[(i, j)] = rng.next_gaussian() * 2f64.powi((i + j) as i32);
            }
        }
        let f = g_pinv.matmul(&tile).matmul(&gt_pinv);
        for ky in 0..3 {
            for kx in 0..3 {
                data.push(f[(ky, kx)]);
            }
        }
    }
    Tensor::from_f64(vec![c_out, c_in, 3, 3], Layout::Nchw, data).expect("shape by construction")
}
