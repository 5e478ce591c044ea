use serde::{Deserialize, Serialize};

/// Transformation engine microarchitecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    /// One row of s per cycle; TᵀŝT reuses the same adders.
    RowByRowSlow,
    /// One row per cycle with extra w_T·w_T output-stationary lanes.
    RowByRowFast,
    /// Fully time-unrolled shift-add PE, one tap at a time.
    TapByTap,
}

/// One transformation engine instance: transform dims and parallelism.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EngineSpec {
    pub kind: EngineKind,
    /// Input rows of the transform matrix (h_T).
    pub h_t: u32,
    /// Output columns of the transform matrix (w_T).
    pub w_t: u32,
    pub p_c: u32,
    pub p_s: u32,
    /// Parallel taps per PE; only > 1 for tap-by-tap engines.
    pub p_t: u32,
    /// Shift-add ops per full 2-D transform (tap-by-tap only), from the
    /// CSE'd schedule of the concrete transform matrix.
    pub ops_per_xform: Option<u32>,
}

/// Throughput and bandwidth figures of an engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineRates {
    pub cycles_per_xform: f64,
    pub parallel_xforms: u32,
    pub rd_bw: f64,
    pub wr_bw: f64,
}

/// Cycle and bandwidth model of the three engine styles:
/// row-by-row slow takes h_T + w_T cycles per transform, fast h_T; the
/// tap-by-tap engine is schedule-dependent and parallelizes over taps too.
pub fn xform_engine_rates(spec: &EngineSpec) -> EngineRates {
    let pcs = (spec.p_c * spec.p_s) as f64;
    match spec.kind {
        EngineKind::RowByRowSlow => EngineRates {
            cycles_per_xform: (spec.h_t + spec.w_t) as f64,
            parallel_xforms: spec.p_c * spec.p_s,
            rd_bw: pcs * spec.h_t as f64,
            wr_bw: pcs * spec.h_t as f64,
        },
        EngineKind::RowByRowFast => EngineRates {
            cycles_per_xform: spec.h_t as f64,
            parallel_xforms: spec.p_c * spec.p_s,
            rd_bw: pcs * spec.h_t as f64,
            wr_bw: pcs * (spec.w_t * spec.w_t) as f64,
        },
        EngineKind::TapByTap => {
            let ops = spec
                .ops_per_xform
                .expect("tap-by-tap engines carry a schedule length") as f64;
            EngineRates {
                cycles_per_xform: (ops / spec.p_t as f64).ceil(),
                parallel_xforms: spec.p_c * spec.p_s * spec.p_t,
                rd_bw: pcs,
                wr_bw: pcs,
            }
        }
    }
}

impl EngineSpec {
    /// Default input-transform engine: row-by-row over the fractal layout,
    /// 32 channels × 2 spatial PEs (64 transforms in flight).
    pub fn input_row_by_row(t: usize) -> EngineSpec {
        EngineSpec {
            kind: EngineKind::RowByRowSlow,
            h_t: t as u32,
            w_t: t as u32,
            p_c: 32,
            p_s: 2,
            p_t: 1,
            ops_per_xform: None,
        }
    }

    /// Default output-transform engine: fast row-by-row, 16 output channels
    /// in parallel. h_T is the Winograd tile side, w_T the spatial side.
    pub fn output_row_by_row_fast(t: usize, m: usize) -> EngineSpec {
        EngineSpec {
            kind: EngineKind::RowByRowFast,
            h_t: t as u32,
            w_t: m as u32,
            p_c: 16,
            p_s: 1,
            p_t: 1,
            ops_per_xform: None,
        }
    }

    /// Weight engine: tap-by-tap, with P_t sized so the transform throughput
    /// matches the per-core share of the external bandwidth (weights arrive
    /// at bw/cores bytes per cycle, 9 bytes per kernel). P_t saturates at the
    /// schedule length, where each transform completes in one cycle.
    pub fn weight_tap_by_tap_matched(
        ops_per_xform: u32,
        bw_per_core: f64,
    ) -> EngineSpec {
        let p_c = 32u32;
        let p_s = 2u32;
        let needed_rate = bw_per_core / 9.0; // transforms per cycle
        let p_t = ((needed_rate * ops_per_xform as f64) / (p_c * p_s) as f64)
            .ceil()
            .clamp(1.0, ops_per_xform as f64) as u32;
        EngineSpec {
            kind: EngineKind::TapByTap,
            h_t: 0,
            w_t: 0,
            p_c,
            p_s,
            p_t,
            ops_per_xform: Some(ops_per_xform),
        }
    }
}
