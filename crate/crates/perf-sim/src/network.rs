use serde::{Deserialize, Serialize};
use tensor_io::LayerShape;

use crate::report::SimReport;
use crate::sim::{im2col_layer_sim, wino_layer_sim};
use crate::{Result, SimError, SystemConfig};

/// Computational kernel a layer may run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgoChoice {
    Im2col,
    WinoF2,
    WinoF4,
}

impl AlgoChoice {
    pub const ALL: [AlgoChoice; 3] = [AlgoChoice::Im2col, AlgoChoice::WinoF2, AlgoChoice::WinoF4];
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerChoice {
    pub shape: LayerShape,
    pub chosen: AlgoChoice,
    pub cycles: u64,
    pub energy_pj: f64,
    /// Cycles of each candidate that was simulated.
    pub candidates: Vec<(AlgoChoice, u64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkReport {
    pub layers: Vec<LayerChoice>,
    pub total_cycles: u64,
    pub total_energy_pj: f64,
}

fn run(algo: AlgoChoice, shape: &LayerShape, cfg: &SystemConfig) -> Result<SimReport> {
    match algo {
        AlgoChoice::Im2col => im2col_layer_sim(shape, cfg),
        AlgoChoice::WinoF2 => wino_layer_sim(shape, 2, cfg),
        AlgoChoice::WinoF4 => wino_layer_sim(shape, 4, cfg),
    }
}

/// im2col cycles divided by Winograd cycles for one layer.
pub fn speedup(shape: &LayerShape, m: usize, cfg: &SystemConfig) -> Result<f64> {
    let base = im2col_layer_sim(shape, cfg)?;
    let wino = wino_layer_sim(shape, m, cfg)?;
    Ok(base.total_cycles as f64 / wino.total_cycles as f64)
}

/// Pick the fastest eligible kernel per layer, the way a compiler would.
/// Winograd kernels are only eligible for 3×3 stride-1 layers.
pub fn network_sim(
    layers: &[(LayerShape, Vec<AlgoChoice>)],
    cfg: &SystemConfig,
) -> Result<NetworkReport> {
    let mut out = Vec::with_capacity(layers.len());
    let mut total_cycles = 0u64;
    let mut total_energy = 0.0f64;
    for (shape, eligible) in layers {
        let mut candidates = Vec::new();
        let mut best: Option<(AlgoChoice, SimReport)> = None;
        for &algo in eligible {
            if algo != AlgoChoice::Im2col && !shape.winograd_eligible() {
                continue;
            }
            let report = run(algo, shape, cfg)?;
            candidates.push((algo, report.total_cycles));
            let better = match &best {
                None => true,
                Some((_, b)) => report.total_cycles < b.total_cycles,
            };
            if better {
                best = Some((algo, report));
            }
        }
        let (chosen, report) = best.ok_or_else(|| {
            SimError::UnsupportedWorkload(format!("no eligible kernel for layer {shape:?}"))
        })?;
        total_cycles += report.total_cycles;
        total_energy += report.energy_pj;
        out.push(LayerChoice {
            shape: *shape,
            chosen,
            cycles: report.total_cycles,
            energy_pj: report.energy_pj,
            candidates,
        });
    }
    Ok(NetworkReport {
        layers: out,
        total_cycles,
        total_energy_pj: total_energy,
    })
}
