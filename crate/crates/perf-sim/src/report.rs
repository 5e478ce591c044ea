use serde::{Deserialize, Serialize};
use tensor_io::LayerShape;

use crate::SystemConfig;

/// Which operator produced the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Im2col,
    WinoF2,
    WinoF4,
}

/// Busy cycles per unit. Per-core units report the busiest core; the memory
/// transfer engines are system-level (behind the broadcast unit).
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct UnitBusy {
    pub mte2: u64,
    pub mte1_in_xform: u64,
    pub mte1_wt_xform: u64,
    pub im2col_engine: u64,
    pub cube: u64,
    pub out_xform: u64,
    pub vector: u64,
    pub mte3: u64,
}

/// Bytes moved per memory. L0C is split by port: A faces the cube,
/// B feeds the fixpipe/output transform.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct MemTraffic {
    pub gm_rd: u64,
    pub gm_wr: u64,
    pub l1_rd: u64,
    pub l1_wr: u64,
    pub l0a_rd: u64,
    pub l0a_wr: u64,
    pub l0b_rd: u64,
    pub l0b_wr: u64,
    pub l0c_rd_a: u64,
    pub l0c_rd_b: u64,
    pub l0c_wr: u64,
}

/// Byte composition of the steady-state GM stream.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct GmSplit {
    pub ifm_bytes: u64,
    pub wt_bytes: u64,
    pub ofm_bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bottleneck {
    Cube,
    InputXform,
    OutputPipe,
    GmTraffic,
}

/// Full result of one layer simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub kernel: Kernel,
    pub shape: LayerShape,
    pub total_cycles: u64,
    pub weight_phase_cycles: u64,
    pub steady_cycles: u64,
    pub drain_cycles: u64,
    pub busy: UnitBusy,
    pub traffic: MemTraffic,
    pub steady_gm: GmSplit,
    pub bottleneck: Bottleneck,
    /// Cube block-steps summed over cores (for energy).
    pub cube_busy_total: u64,
    pub energy_pj: f64,
    /// Spatial-equivalent MACs per cycle.
    pub macs_per_cycle: f64,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_header() -> &'static str {
        "kernel,batch,h,w,c_in,c_out,total_cycles,weight_phase,steady,bottleneck,energy_pj,macs_per_cycle"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:?},{},{},{},{},{},{},{},{},{:?},{:.1},{:.2}",
            self.kernel,
            self.shape.batch,
            self.shape.h,
            self.shape.w,
            self.shape.c_in,
            self.shape.c_out,
            self.total_cycles,
            self.weight_phase_cycles,
            self.steady_cycles,
            self.bottleneck,
            self.energy_pj,
            self.macs_per_cycle
        )
    }
}

/// Energy in pJ: Σ bytes × per-access cost + Σ unit busy-cycles × power.
/// The cube and L0C port-B costs depend on the kernel (winograd-domain data
/// switches more).
pub fn energy_estimate(report: &SimReport, cfg: &SystemConfig) -> f64 {
    let t = &report.traffic;
    let wino = report.kernel != Kernel::Im2col;
    let l0c_b_pj = if wino {
        cfg.l0c_rd_b_wino_pj
    } else {
        cfg.l0c_rd_b_im2col_pj
    };
    let mem = t.gm_rd as f64 * cfg.gm_pj_per_byte
        + t.gm_wr as f64 * cfg.gm_pj_per_byte
        + t.l1_rd as f64 * cfg.l1_rd_pj
        + t.l1_wr as f64 * cfg.l1_wr_pj
        + t.l0a_rd as f64 * cfg.l0a_rd_pj
        + t.l0a_wr as f64 * cfg.l0a_wr_pj
        + t.l0b_rd as f64 * cfg.l0b_rd_pj
        + t.l0b_wr as f64 * cfg.l0b_wr_pj
        + t.l0c_rd_a as f64 * cfg.l0c_rd_a_pj
        + t.l0c_rd_b as f64 * l0c_b_pj
        + t.l0c_wr as f64 * cfg.l0c_wr_pj;

    let cube_power = if wino {
        cfg.cube_power_wino_mw
    } else {
        cfg.cube_power_im2col_mw
    };
    let ns = cfg.cycle_ns();
    let cores = cfg.num_cores as f64;
    // cube busy is tracked as total block-steps over all cores
    let units = report.cube_busy_total as f64 * cube_power * ns
        + report.busy.mte1_in_xform as f64 * cores * cfg.in_xform_power_mw * ns
        + report.busy.mte1_wt_xform as f64 * cores * cfg.wt_xform_power_mw * ns
        + report.busy.out_xform as f64 * cores * cfg.out_xform_power_mw * ns
        + report.busy.im2col_engine as f64 * cores * cfg.im2col_engine_power_mw * ns
        + report.busy.vector as f64 * cores * cfg.vector_power_mw * ns;
    // 1 mW × 1 ns = 1 pJ
    mem + units
}

/// Critical-path attribution in the style of a stacked cycle breakdown:
/// the weight phase, then the steady state charged to its bottleneck (GM
/// time split by byte composition), then the drain charged to the output
/// path. Percentages sum to 100.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BreakdownEntry {
    pub category: String,
    pub cycles: f64,
    pub percent: f64,
}

pub fn breakdown(report: &SimReport) -> Vec<BreakdownEntry> {
    let total = report.total_cycles.max(1) as f64;
    let mut cats: Vec<(&str, f64)> = vec![
        ("wt_transfer_xform", report.weight_phase_cycles as f64),
        ("ifm_transfer", 0.0),
        ("input_xform", 0.0),
        ("cube", 0.0),
        ("output_xform_vector", report.drain_cycles as f64),
        ("ofm_write", 0.0),
    ];
    let steady = report.steady_cycles as f64;
    match report.bottleneck {
        Bottleneck::Cube => cats[3].1 += steady,
        Bottleneck::InputXform => cats[2].1 += steady,
        Bottleneck::OutputPipe => cats[4].1 += steady,
        Bottleneck::GmTraffic => {
            let g = &report.steady_gm;
            let sum = (g.ifm_bytes + g.wt_bytes + g.ofm_bytes).max(1) as f64;
            cats[1].1 += steady * g.ifm_bytes as f64 / sum;
            cats[0].1 += steady * g.wt_bytes as f64 / sum;
            cats[5].1 += steady * g.ofm_bytes as f64 / sum;
        }
    }
    cats.into_iter()
        .map(|(name, cycles)| BreakdownEntry {
            category: name.to_string(),
            cycles,
            percent: 100.0 * cycles / total,
        })
        .collect()
}
