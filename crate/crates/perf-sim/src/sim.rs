use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use tensor_io::{LayerShape, Padding};
use winograd_core::{make_transform_set, TransformKind};

use crate::engine::{xform_engine_rates, EngineSpec};
use crate::report::{energy_estimate, Bottleneck, GmSplit, Kernel, MemTraffic, SimReport, UnitBusy};
use crate::schedule::shift_add_ops_2d;
use crate::{Result, SimError, SystemConfig};

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Seeded Gaussian latency draw; the stream is derived from the seed and the
/// workload so reports are independent of simulation order.
fn latency_jitter(cfg: &SystemConfig, shape: &LayerShape, tag: u64) -> f64 {
    let mut h = 0xcbf29ce484222325u64;
    for v in [
        cfg.seed,
        tag,
        shape.batch as u64,
        shape.h as u64,
        shape.w as u64,
        shape.c_in as u64,
        shape.c_out as u64,
        shape.kernel as u64,
    ] {
        h ^= v;
        h = h.wrapping_mul(0x100000001b3);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(h);
    let normal = Normal::new(0.0, cfg.gm_jitter_std).unwrap();
    (cfg.gm_latency + normal.sample(&mut rng).round()).max(0.0)
}

fn input_dims(shape: &LayerShape) -> (u64, u64) {
    let pad = match shape.padding {
        Padding::Same => (shape.kernel - 1) / 2,
        Padding::Valid => 0,
    };
    let h_in = shape.stride * (shape.h - 1) + shape.kernel - 2 * pad;
    let w_in = shape.stride * (shape.w - 1) + shape.kernel - 2 * pad;
    (h_in as u64, w_in as u64)
}

/// Baseline operator: im2col lowering into the cube. Compute- or GM-bound;
/// the im2col engine itself is assumed never to throttle the cube.
pub fn im2col_layer_sim(shape: &LayerShape, cfg: &SystemConfig) -> Result<SimReport> {
    shape.validate().map_err(SimError::Tensor)?;
    cfg.validate()?;
    let (b, h, w) = (shape.batch as u64, shape.h as u64, shape.w as u64);
    let (cin, cout, k) = (shape.c_in as u64, shape.c_out as u64, shape.kernel as u64);
    let (h_in, w_in) = input_dims(shape);

    let row_blocks = b * ceil_div(h * w, cfg.cube_m);
    let red_blocks = ceil_div(cin * k * k, cfg.cube_k);
    let cout_blocks = ceil_div(cout, cfg.cube_n);
    let cout_blocks_core = ceil_div(cout_blocks, cfg.num_cores as u64);

    let cube_wall = row_blocks * red_blocks * cout_blocks_core;
    let cube_total = row_blocks * red_blocks * cout_blocks;

    // weight residency in L1 decides how often the iFM streams in
    let budget = cfg
        .mem
        .l1
        .saturating_sub(cfg.l1_reserve)
        .max(1);
    let wt_slab = cin * k * k * cfg.cube_n; // one 16-cout slab
    let slabs_resident = budget / wt_slab.max(1);
    if slabs_resident == 0 {
        return Err(SimError::InfeasibleMapping(format!(
            "L1 ({} B) cannot hold one {}-channel weight slab of {} B",
            cfg.mem.l1, cfg.cube_n, wt_slab
        )));
    }
    let ifm_once = b * h_in * w_in * cin;
    let chunks = ceil_div(cout_blocks_core, slabs_resident);
    let ifm_passes = if chunks <= 1 || ifm_once + wt_slab <= budget {
        1
    } else {
        chunks
    };

    let wt_bytes = cout * cin * k * k;
    let ofm_bytes = b * h * w * cout;
    let gm_rd = wt_bytes + ifm_once * ifm_passes;
    let gm_wr = ofm_bytes;
    let gm_cycles = (gm_rd + gm_wr) as f64 / cfg.gm_bandwidth;

    let steady = cube_wall.max(gm_cycles.ceil() as u64);
    let prologue = latency_jitter(cfg, shape, 0).ceil() as u64;
    let drain = latency_jitter(cfg, shape, 1).ceil() as u64;
    let total = steady + prologue + drain;

    let out_padded = row_blocks * cfg.cube_m * cout_blocks * cfg.cube_n;
    let vector = (ofm_bytes as f64 / 256.0).ceil() as u64;
    let busy = UnitBusy {
        mte2: (gm_rd as f64 / cfg.gm_bandwidth).ceil() as u64,
        mte1_in_xform: 0,
        mte1_wt_xform: 0,
        im2col_engine: cube_wall,
        cube: cube_wall,
        out_xform: 0,
        vector: vector / cfg.num_cores as u64,
        mte3: (gm_wr as f64 / cfg.gm_bandwidth).ceil() as u64,
    };
    let traffic = MemTraffic {
        gm_rd,
        gm_wr,
        l1_rd: ifm_once * ifm_passes * k * k + wt_bytes,
        l1_wr: ifm_once * ifm_passes + wt_bytes,
        l0a_rd: cube_total * cfg.cube_m * cfg.cube_k,
        l0a_wr: b * h * w * cin * k * k,
        l0b_rd: cube_total * cfg.cube_k * cfg.cube_n,
        l0b_wr: wt_bytes,
        l0c_rd_a: (red_blocks - 1) * row_blocks * cout_blocks * cfg.cube_m * cfg.cube_n * 4,
        l0c_rd_b: out_padded * 4,
        l0c_wr: red_blocks * row_blocks * cout_blocks * cfg.cube_m * cfg.cube_n * 4,
    };

    let bottleneck = if cube_wall >= gm_cycles.ceil() as u64 {
        Bottleneck::Cube
    } else {
        Bottleneck::GmTraffic
    };

    let mut report = SimReport {
        kernel: Kernel::Im2col,
        shape: *shape,
        total_cycles: total,
        weight_phase_cycles: 0,
        steady_cycles: steady,
        drain_cycles: prologue + drain,
        busy,
        traffic,
        steady_gm: GmSplit {
            ifm_bytes: ifm_once * ifm_passes,
            wt_bytes,
            ofm_bytes,
        },
        bottleneck,
        cube_busy_total: cube_total,
        energy_pj: 0.0,
        macs_per_cycle: shape.spatial_macs() as f64 / total as f64,
    };
    report.energy_pj = energy_estimate(&report, cfg);
    Ok(report)
}

/// The Winograd operator: weight-stationary, triple-double-buffered.
///
/// Phase (a) loads and transforms the weights on the fly (tap-by-tap engine
/// throughput-matched to the external bandwidth); phase (b) is the steady
/// state where the slowest of {input transform, cube, amortized output
/// pipeline, GM traffic under broadcast} sets the pace.
pub fn wino_layer_sim(shape: &LayerShape, m: usize, cfg: &SystemConfig) -> Result<SimReport> {
    shape.validate().map_err(SimError::Tensor)?;
    cfg.validate()?;
    if !shape.winograd_eligible() {
        return Err(SimError::UnsupportedWorkload(format!(
            "winograd needs k=3, stride=1; got k={}, stride={}",
            shape.kernel, shape.stride
        )));
    }
    let ts = make_transform_set(m)
        .map_err(|e| SimError::UnsupportedWorkload(e.to_string()))?;
    let t = ts.t() as u64;
    let m_u = m as u64;

    let (b, cin, cout) = (shape.batch as u64, shape.c_in as u64, shape.c_out as u64);
    let hp = ceil_div(shape.h as u64, m_u) * m_u;
    let wp = ceil_div(shape.w as u64, m_u) * m_u;
    let (h_in, w_in) = input_dims(shape);
    let tiles = (hp / m_u) * (wp / m_u);

    let row_blocks = b * ceil_div(tiles, cfg.cube_m);
    let cin_blocks = ceil_div(cin, cfg.cube_k);
    let cout_blocks = ceil_div(cout, cfg.cube_n);
    let cout_blocks_core = ceil_div(cout_blocks, cfg.num_cores as u64);
    let cout_core = cout_blocks_core * cfg.cube_n;

    let cube_wall = row_blocks * cin_blocks * cout_blocks_core * t * t;
    let cube_total = row_blocks * cin_blocks * cout_blocks * t * t;

    // L0C must hold a double-buffered group of 64 output channels
    let group_couts = cout_core.min(4 * cfg.cube_n);
    let l0c_need = 2 * group_couts * cfg.cube_m * t * t * 4;
    if l0c_need > cfg.mem.l0c {
        return Err(SimError::InfeasibleMapping(format!(
            "L0C needs {} B for a double-buffered {}-channel tap group, has {}",
            l0c_need, group_couts, cfg.mem.l0c
        )));
    }

    // L1 mapping: transformed weights stationary (chunked over output
    // channels when too large), the rest double-buffers iFM blocks of
    // Sb×Sb output pixels
    let budget = cfg.mem.l1.saturating_sub(cfg.l1_reserve);
    let slab = t * t * cin * cfg.cube_n;
    let ifm_min = 2 * (m_u + 2) * (m_u + 2) * cin;
    let mut chunks = 0u64;
    for c in 1..=cout_blocks_core {
        let wt_chunk = ceil_div(cout_blocks_core, c) * slab;
        if wt_chunk + ifm_min <= budget {
            chunks = c;
            break;
        }
    }
    if chunks == 0 {
        return Err(SimError::InfeasibleMapping(format!(
            "L1 ({} B) cannot hold one transformed weight slab ({} B) plus a \
             minimal double-buffered iFM block ({} B)",
            cfg.mem.l1, slab, ifm_min
        )));
    }
    let wt_chunk = ceil_div(cout_blocks_core, chunks) * slab;
    let rem = budget - wt_chunk;
    let sb = [16u64, 12, 8, 4]
        .into_iter()
        .find(|s| s % m_u == 0 && 2 * (s + 2) * (s + 2) * cin <= rem)
        .unwrap_or(m_u);

    // iFM GM traffic: Sb-block footprints with halo, clipped to the input
    let cover = |extent: u64, real: u64| {
        let mut rows = 0u64;
        let mut y = 0u64;
        while y < extent {
            let blk = sb.min(extent - y);
            let lo = (y as i64) - 1;
            let hi = (y + blk + 1) as i64;
            rows += (hi.min(real as i64) - lo.max(0)).max(0) as u64;
            y += blk;
        }
        rows
    };
    let ifm_once = b * cover(hp, h_in) * cover(wp, w_in) * cin;
    let broadcast_factor = if cfg.broadcast { 1 } else { cfg.num_cores as u64 };
    let ifm_gm = ifm_once * chunks * broadcast_factor;

    // weights stream once and are transformed on the fly
    let wt_bytes = cout * cin * 9;
    let ofm_bytes = b * shape.h as u64 * shape.w as u64 * cout;

    // engines
    let in_spec = EngineSpec::input_row_by_row(t as usize);
    let in_rates = xform_engine_rates(&in_spec);
    let (g_int, _) = ts.integer_scaled(TransformKind::Weight);
    let wt_ops = shift_add_ops_2d(g_int, 3) as u32;
    let wt_spec =
        EngineSpec::weight_tap_by_tap_matched(wt_ops, cfg.gm_bandwidth / cfg.num_cores as f64);
    let wt_rates = xform_engine_rates(&wt_spec);
    let out_spec = EngineSpec::output_row_by_row_fast(t as usize, m);
    let out_rates = xform_engine_rates(&out_spec);

    // input transforms re-run for every 64-cout reuse group of each chunk
    let couts_chunk = ceil_div(cout_blocks_core, chunks) * cfg.cube_n;
    let xf_passes = chunks * ceil_div(couts_chunk, 4 * cfg.cube_n);
    let n_in_xf = b * tiles * cin * xf_passes;
    let in_xf_cycles =
        (n_in_xf as f64 * in_rates.cycles_per_xform / in_rates.parallel_xforms as f64).ceil()
            as u64;

    // output pipeline: fast row-by-row over 16 channels + vector requant
    let out_xf_cycles = b * tiles * cout_blocks_core * out_rates.cycles_per_xform as u64;
    let vector_cycles = (b * hp * wp * cout_core) as f64 / 256.0;
    let out_pipe = out_xf_cycles + vector_cycles.ceil() as u64;

    // weight phase: chunk 0 is exposed; later chunk loads overlap the steady
    // state and are charged to the GM pool
    let n_wt_xf = cin * cout_core;
    let wt_xf_cycles =
        (n_wt_xf as f64 * wt_rates.cycles_per_xform / wt_rates.parallel_xforms as f64).ceil()
            as u64;
    let wt_gm_cycles = (wt_bytes as f64 / chunks as f64 / cfg.gm_bandwidth).ceil() as u64;
    let weight_phase = wt_gm_cycles.max(wt_xf_cycles / chunks)
        + latency_jitter(cfg, shape, 2).ceil() as u64;

    let wt_stream_bytes = wt_bytes - wt_bytes / chunks;
    let steady_gm_bytes = ifm_gm + ofm_bytes + wt_stream_bytes;
    let gm_cycles = (steady_gm_bytes as f64 / cfg.gm_bandwidth).ceil() as u64;

    let steady = cube_wall.max(in_xf_cycles).max(out_pipe).max(gm_cycles);
    let drain = latency_jitter(cfg, shape, 3).ceil() as u64;
    let total = weight_phase + steady + drain;

    let bottleneck = [
        (Bottleneck::Cube, cube_wall),
        (Bottleneck::InputXform, in_xf_cycles),
        (Bottleneck::OutputPipe, out_pipe),
        (Bottleneck::GmTraffic, gm_cycles),
    ]
    .into_iter()
    .max_by_key(|&(_, c)| c)
    .map(|(b, _)| b)
    .unwrap();

    let taps_bytes = b * tiles * cin * t * t; // int8 winograd-domain taps
    let busy = UnitBusy {
        mte2: ((ifm_gm + wt_bytes) as f64 / cfg.gm_bandwidth).ceil() as u64,
        mte1_in_xform: in_xf_cycles,
        mte1_wt_xform: wt_xf_cycles,
        im2col_engine: 0,
        cube: cube_wall,
        out_xform: out_xf_cycles,
        vector: vector_cycles.ceil() as u64,
        mte3: (ofm_bytes as f64 / cfg.gm_bandwidth).ceil() as u64,
    };
    let out_padded = row_blocks * cfg.cube_m * cout_blocks * cfg.cube_n;
    let traffic = MemTraffic {
        gm_rd: ifm_gm + wt_bytes,
        gm_wr: ofm_bytes,
        l1_rd: ifm_once * chunks * cfg.num_cores as u64 * (t * t) / (m_u * m_u)
            + cube_total * cfg.cube_k * cfg.cube_n,
        l1_wr: ifm_once * chunks + t * t * cin * cout,
        l0a_rd: cube_total * cfg.cube_m * cfg.cube_k,
        l0a_wr: taps_bytes * xf_passes * cfg.num_cores as u64,
        l0b_rd: wt_bytes,
        l0b_wr: wt_bytes,
        l0c_rd_a: (cin_blocks - 1) * row_blocks * cout_blocks * t * t * cfg.cube_m * cfg.cube_n
            * 4,
        l0c_rd_b: out_padded * t * t / (m_u * m_u) * 4,
        l0c_wr: cin_blocks * row_blocks * cout_blocks * t * t * cfg.cube_m * cfg.cube_n * 4,
    };

    let mut report = SimReport {
        kernel: if m == 2 { Kernel::WinoF2 } else { Kernel::WinoF4 },
        shape: *shape,
        total_cycles: total,
        weight_phase_cycles: weight_phase,
        steady_cycles: steady,
        drain_cycles: drain,
        busy,
        traffic,
        steady_gm: GmSplit {
            ifm_bytes: ifm_gm,
            wt_bytes: wt_stream_bytes,
            ofm_bytes,
        },
        bottleneck,
        cube_busy_total: cube_total,
        energy_pj: 0.0,
        macs_per_cycle: shape.spatial_macs() as f64 / total as f64,
    };
    report.energy_pj = energy_estimate(&report, cfg);
    Ok(report)
}
