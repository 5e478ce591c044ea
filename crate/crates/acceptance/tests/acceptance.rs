//! Acceptance criteria, one test per criterion (criterion 2 is split into
//! its two independent claims). Every test prints a `[criterion N] PASS`
//! line when it holds; assertion failures mark the criterion red.

use std::time::Instant;

use tapwise_quant::{
    quant_error_report, quantized_winograd_conv2d, ste_grad_log2t, synthetic_tapscaled_weights,
    CalibState, Domain, RescaleBackend, ScaleRole, Strategy, TapScaleMatrix,
};
use tensor_io::{LayerShape, Layout, Padding, Tensor, XorShift64Star};
use winograd_core::{
    bit_growth, direct_conv2d, make_transform_set, validate_transform_set, winograd_conv2d,
    IntMat, TransformKind,
};

fn random_i8(shape: Vec<usize>, rng: &mut XorShift64Star) -> Tensor {
    let n: usize = shape.iter().product();
    Tensor::from_i8(shape, Layout::Nchw, (0..n).map(|_| rng.next_i8()).collect()).unwrap()
}

// ── criterion 1: exactness ──────────────────────────────────────────────

#[test]
fn criterion_01_exactness() {
    let start = Instant::now();

    // all basis pairs, exact rational arithmetic
    for m in [2usize, 4] {
        let ts = make_transform_set(m).unwrap();
        assert!(
            validate_transform_set(&ts),
            "basis-pair exactness failed for m={m}"
        );
    }

    // 100 random integer layers up to 64 channels and 32×32
    let mut rng = XorShift64Star::new(0xACCE);
    for i in 0..100 {
        let m = if i % 2 == 0 { 2 } else { 4 };
        let ts = make_transform_set(m).unwrap();
        let c_in = 1 + rng.next_usize(64);
        let c_out = 1 + rng.next_usize(64);
        let h = 4 + rng.next_usize(29);
        let w = 4 + rng.next_usize(29);
        let x = random_i8(vec![1, c_in, h, w], &mut rng);
        let wt = random_i8(vec![c_out, c_in, 3, 3], &mut rng);
        let padding = if i % 3 == 0 { Padding::Valid } else { Padding::Same };
        let got = winograd_conv2d(&x, &wt, &ts, padding).unwrap();
        let want = direct_conv2d(&x, &wt, padding, 1).unwrap();
        assert_eq!(got, want, "layer {i}: m={m} {c_in}x{c_out} {h}x{w}");
    }

    // float mode within 1e-9 relative
    let mut rng = XorShift64Star::new(0xF10A);
    for m in [2usize, 4] {
        let ts = make_transform_set(m).unwrap();
        let n: usize = 2 * 3 * 12 * 12;
        let x = Tensor::from_f64(
            vec![2, 3, 12, 12],
            Layout::Nchw,
            (0..n).map(|_| rng.next_range(-1.0, 1.0)).collect(),
        )
        .unwrap();
        let wn = 4 * 3 * 9;
        let w = Tensor::from_f64(
            vec![4, 3, 3, 3],
            Layout::Nchw,
            (0..wn).map(|_| rng.next_range(-1.0, 1.0)).collect(),
        )
        .unwrap();
        let got = winograd_conv2d(&x, &w, &ts, Padding::Same).unwrap();
        let want = direct_conv2d(&x, &w, Padding::Same, 1).unwrap();
        let scale = want
            .as_f64()
            .unwrap()
            .iter()
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        for (a, b) in got.as_f64().unwrap().iter().zip(want.as_f64().unwrap()) {
            assert!((a - b).abs() <= 1e-9 * scale, "float mode m={m}");
        }
    }

    let dt = start.elapsed();
    assert!(dt.as_secs() < 60, "runtime {dt:?} exceeds one minute");
    println!("[criterion 1] PASS: exact on basis pairs and 100 random integer layers, float ≤ 1e-9 ({dt:?})");
}

// ── criterion 2: bit growth ─────────────────────────────────────────────

/// Literal exhaustive enumeration: per output tap, the inner 1-D sums over
/// disjoint cells are enumerated over all 2^n values per cell, and extremes
/// combine across rows.
fn exhaustive_growth(t: &IntMat, n: u32) -> u32 {
    let lo = -(1i64 << (n - 1));
    let hi = (1i64 << (n - 1)) - 1;
    let extremes: Vec<(i128, i128)> = (0..t.rows())
        .map(|j| {
            let cells: Vec<i64> = t.row(j).iter().copied().filter(|&c| c != 0).collect();
            if cells.is_empty() {
                return (0, 0);
            }
            let base = (hi - lo + 1) as u64;
            let (mut mn, mut mx) = (i128::MAX, i128::MIN);
            for idx in 0..base.pow(cells.len() as u32) {
                let mut rem = idx;
                let mut v = 0i128;
                for &c in &cells {
                    v += c as i128 * (lo + (rem % base) as i64) as i128;
                    rem /= base;
                }
                mn = mn.min(v);
                mx = mx.max(v);
            }
            (mn, mx)
        })
        .collect();
    let mut worst = n;
    for i in 0..t.rows() {
        for j in 0..t.rows() {
            let (vmin, vmax) = extremes[j];
            let (mut mn, mut mx) = (0i128, 0i128);
            for &c in t.row(i) {
                let (a, b) = (c as i128 * vmin, c as i128 * vmax);
                mn += a.min(b);
                mx += a.max(b);
            }
            let mut p = 1u32;
            while -(1i128 << (p - 1)) > mn || mx > (1i128 << (p - 1)) - 1 {
                p += 1;
            }
            worst = worst.max(p);
        }
    }
    worst - n
}

#[test]
fn criterion_02a_bit_growth_matches_exhaustive_search() {
    for m in [2usize, 4] {
        let ts = make_transform_set(m).unwrap();
        for kind in [
            TransformKind::Input,
            TransformKind::Weight,
            TransformKind::Output,
        ] {
            let (mat, _) = ts.integer_scaled(kind);
            for n in [2u32, 3] {
                assert_eq!(
                    bit_growth(mat, n),
                    exhaustive_growth(mat, n),
                    "m={m} {kind:?} n={n}"
                );
            }
        }
    }
    println!("[criterion 2a] PASS: bit growth equals exhaustive search at n ∈ {{2,3}}");
}

#[test]
fn criterion_02b_bit_growth_published_budgets() {
    let f2 = make_transform_set(2).unwrap();
    let f4 = make_transform_set(4).unwrap();
    let g = |ts: &winograd_core::TransformSet, k| {
        let (m, _) = ts.integer_scaled(k);
        bit_growth(m, 8)
    };
    let f2_in = g(&f2, TransformKind::Input);
    let f2_wt = g(&f2, TransformKind::Weight);
    let f4_in = g(&f4, TransformKind::Input);
    let f4_wt = g(&f4, TransformKind::Weight);
    eprintln!(
        "[criterion 2b] measured extra bits at n=8: F2 input {f2_in}, F2 weight {f2_wt}, \
         F4 input {f4_in}, F4 weight {f4_wt} (published budgets: 2, 3, 8, 10)"
    );

    assert_eq!(f2_in, 2, "F2 input transform budget");
    assert_eq!(f4_wt, 10, "F4 weight transform budget");
    // the two budgets below do not match any bit-true worst case (the
    // published numbers are inconsistent with the published worst-case
    // formula itself); asserted as stated, expected red — see the analysis
    // in the review notes
    assert_eq!(
        f2_wt, 3,
        "published F2 weight budget is 3; exact worst case is {f2_wt}"
    );
    assert_eq!(
        f4_in, 8,
        "published F4 input/output budget is 8; exact worst case is {f4_in}"
    );
    println!("[criterion 2b] PASS: published bit budgets reproduced");
}

// ── criterion 3: MAC reduction constants ────────────────────────────────

#[test]
fn criterion_03_mac_reduction_constants() {
    assert_eq!(winograd_core::tile_macs(2), (16, 36));
    assert_eq!(winograd_core::tile_macs(4), (36, 144));
    assert_eq!(winograd_core::mac_reduction(2), 2.25);
    assert_eq!(winograd_core::mac_reduction(4), 4.0);
    println!("[criterion 3] PASS: per-tile op counting gives 2.25 (F2) and 4.0 (F4) exactly");
}

// ── criterion 4: power-of-two path ──────────────────────────────────────

#[test]
fn criterion_04_pow2_shift_path_bit_identical() {
    let mut rng = XorShift64Star::new(0x5417);
    for m in [2usize, 4] {
        let ts = make_transform_set(m).unwrap();
        let t = ts.t();
        for trial in 0..1000 {
            let x = random_i8(vec![1, 1, m, m], &mut rng);
            let w = random_i8(vec![1, 1, 3, 3], &mut rng);
            let pow2 = |rng: &mut XorShift64Star, role| {
                let vals = (0..t * t)
                    .map(|_| 2f64.powi(rng.next_usize(13) as i32 - 6))
                    .collect();
                TapScaleMatrix::new(t, vals, role).unwrap()
            };
            let sb = pow2(&mut rng, ScaleRole::SB);
            let sg = pow2(&mut rng, ScaleRole::SG);
            let b = 8 + (trial % 3) as u32;
            let shift = quantized_winograd_conv2d(
                &x, &w, &ts, &sb, &sg, b, Padding::Same, RescaleBackend::Shift,
            )
            .unwrap();
            let division = quantized_winograd_conv2d(
                &x, &w, &ts, &sb, &sg, b, Padding::Same, RescaleBackend::ExactDiv,
            )
            .unwrap();
            for (a, b_) in shift
                .as_f64()
                .unwrap()
                .iter()
                .zip(division.as_f64().unwrap())
            {
                assert_eq!(a.to_bits(), b_.to_bits(), "m={m} trial={trial}");
            }
        }
    }
    println!("[criterion 4] PASS: shift path bit-identical to division path on 1000 tiles per m");
}

// ── criterion 5: quantization-error ordering ────────────────────────────

#[test]
fn criterion_05_quant_error_ordering() {
    let ts = make_transform_set(4).unwrap();
    for seed in [42u64, 1001] {
        let w = synthetic_tapscaled_weights(8, 8, &ts, seed);
        let layer = quant_error_report(&w, Strategy::Layer, Domain::Winograd, 8, Some(&ts)).unwrap();
        let tap = quant_error_report(&w, Strategy::Tap, Domain::Winograd, 8, Some(&ts)).unwrap();
        let both =
            quant_error_report(&w, Strategy::ChannelAndTap, Domain::Winograd, 8, Some(&ts))
                .unwrap();
        assert!(
            tap.mean_log2_rel_error <= layer.mean_log2_rel_error - 1.0,
            "seed {seed}: tap {} vs layer {}",
            tap.mean_log2_rel_error,
            layer.mean_log2_rel_error
        );
        assert!(
            both.mean_log2_rel_error <= tap.mean_log2_rel_error + 0.05,
            "seed {seed}: chan+tap {} vs tap {}",
            both.mean_log2_rel_error,
            tap.mean_log2_rel_error
        );
    }

    // conditional absolute check against real pre-trained weights
    match std::env::var("RESNET34_WEIGHTS") {
        Ok(dir) => {
            run_resnet34_check(&dir);
            println!("[criterion 5] PASS: ordering on synthetic ensembles and pre-trained weights");
        }
        Err(_) => {
            println!(
                "[criterion 5] PASS: tap ≤ layer − 1.0 and chan+tap ≤ tap on synthetic ensembles \
                 (pre-trained weight check skipped: RESNET34_WEIGHTS not set)"
            );
        }
    }
}

fn run_resnet34_check(dir: &str) {
    let ts = make_transform_set(4).unwrap();
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .expect("RESNET34_WEIGHTS must be a directory of .wtns layer tensors")
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "wtns"))
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no .wtns files in {dir}");

    let agg = |strategy: Strategy, domain: Domain| {
        let mut log_sum = 0.0;
        let mut count = 0f64;
        for f in &files {
            let w = tensor_io::read_tensor(f).unwrap();
            let w =
                Tensor::from_f64(w.shape().to_vec(), w.layout(), w.to_f64_vec()).unwrap();
            let ts_opt = (domain == Domain::Winograd).then_some(&ts);
            let rep = quant_error_report(&w, strategy, domain, 8, ts_opt).unwrap();
            let n = w.len() as f64;
            log_sum += rep.mean_log2_rel_error * n;
            count += n;
        }
        log_sum / count
    };
    let checks = [
        (Strategy::Layer, Domain::Spatial, -6.01),
        (Strategy::Channel, Domain::Spatial, -6.72),
        (Strategy::Layer, Domain::Winograd, -5.58),
        (Strategy::Tap, Domain::Winograd, -6.78),
    ];
    for (strategy, domain, want) in checks {
        let got = agg(strategy, domain);
        assert!(
            (got - want).abs() <= 0.3,
            "{strategy:?}/{domain:?}: got 2^{got:.2}, published 2^{want:.2}"
        );
    }
}

// ── criterion 6: STE gradient ───────────────────────────────────────────

#[test]
fn criterion_06_ste_gradient_finite_differences() {
    let mut rng = XorShift64Star::new(0x57E6);
    let h = 1e-5;
    for _ in 0..1000 {
        let b = 4 + rng.next_usize(7) as u32;
        let t = 2f64.powf(rng.next_range(-3.0, 3.0));
        let s = tapwise_quant::pow2_round_scalar(t);
        let bound = (1i64 << (b - 1)) as f64;
        let sign = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
        let x = sign * s * bound * (1.05 + rng.next_f64());

        let fake = |log2s: f64| {
            let sc = 2f64.powf(log2s);
            sc * (x / sc).round().clamp(-bound, bound - 1.0)
        };
        let tau0 = s.log2();
        let fd = (fake(tau0 + h) - fake(tau0 - h)) / (2.0 * h);
        let got = ste_grad_log2t(x, t, b).unwrap();
        assert!(
            (got - fd).abs() <= 1e-6 * (1.0 + fd.abs()),
            "x={x} t={t} b={b}: {got} vs fd {fd}"
        );
    }
    println!("[criterion 6] PASS: STE gradient matches finite differences on both saturated branches");
}

// ── criterion 7: simulator trends ───────────────────────────────────────

const GRID_PAIRS: [(usize, usize); 8] = [
    (64, 64),
    (64, 128),
    (128, 128),
    (128, 192),
    (192, 256),
    (256, 256),
    (256, 384),
    (512, 512),
];
const GRID_RES: [usize; 4] = [16, 32, 64, 128];

#[test]
fn criterion_07_simulator_trends() {
    let start = Instant::now();
    let cfg = perf_sim::SystemConfig::default();

    let mut cells = 0;
    for res in GRID_RES {
        for (ci, co) in GRID_PAIRS {
            let mut per_batch = Vec::new();
            for b in [1usize, 8] {
                let s = LayerShape::conv3x3(b, res, res, ci, co);
                let sp = perf_sim::speedup(&s, 4, &cfg).unwrap();
                assert!(sp <= 4.0, "F4 ceiling at {res} ({ci},{co}) B{b}: {sp}");
                per_batch.push(sp);
                cells += 1;
            }
            assert!(
                per_batch[1] + 1e-9 >= per_batch[0],
                "batch trend {res} ({ci},{co}): {per_batch:?}"
            );
        }
        // C_in chains at fixed C_out (the macro-trend the grid encodes);
        // 0.02 of slack covers jitter and weight-phase arithmetic at
        // near-parity cells
        for chain in [[(64, 128), (128, 128)], [(192, 256), (256, 256)]] {
            for b in [1usize, 8] {
                let lo = perf_sim::speedup(
                    &LayerShape::conv3x3(b, res, res, chain[0].0, chain[0].1),
                    4,
                    &cfg,
                )
                .unwrap();
                let hi = perf_sim::speedup(
                    &LayerShape::conv3x3(b, res, res, chain[1].0, chain[1].1),
                    4,
                    &cfg,
                )
                .unwrap();
                assert!(hi >= lo - 0.02, "cin trend res {res} B{b}: {lo} -> {hi}");
            }
        }
    }
    assert!(cells >= 27, "grid must have at least 27 cells");

    // spot values within ±30%
    let sp = perf_sim::speedup(&LayerShape::conv3x3(8, 32, 32, 128, 128), 4, &cfg).unwrap();
    assert!((sp - 2.62).abs() / 2.62 <= 0.30, "(128,128) spot: {sp:.3}");
    let sp2 = perf_sim::speedup(&LayerShape::conv3x3(8, 32, 32, 256, 256), 4, &cfg).unwrap();
    assert!((sp2 - 3.18).abs() / 3.18 <= 0.30, "(256,256) spot: {sp2:.3}");

    let dt = start.elapsed();
    assert!(dt.as_secs() < 10, "grid runtime {dt:?} exceeds 10 s");
    println!(
        "[criterion 7] PASS: {cells} cells ≤ 4.0, monotone trends, spots {sp:.2}/{sp2:.2} \
         vs 2.62/3.18 ({dt:?})"
    );
}

// ── criterion 8: traffic invariants ─────────────────────────────────────

#[test]
fn criterion_08_traffic_invariants() {
    let cfg = perf_sim::SystemConfig::default();
    for (ci, co, b) in [(64usize, 64usize, 1usize), (128, 256, 8), (512, 512, 4)] {
        let s = LayerShape::conv3x3(b, 32, 32, ci, co);
        let r = perf_sim::wino_layer_sim(&s, 4, &cfg).unwrap();
        let spatial_wt = (ci * co * 9) as u64;
        assert_eq!(
            r.traffic.gm_rd - r.steady_gm.ifm_bytes,
            spatial_wt,
            "weights stream from GM exactly once (spatial volume)"
        );
        let ifm_l1 = r.steady_gm.ifm_bytes;
        assert_eq!(
            r.traffic.l1_wr - ifm_l1,
            4 * spatial_wt,
            "transformed weights expand exactly 4x into L1"
        );
    }
    println!("[criterion 8] PASS: weight GM reads = spatial volume; L1 weight-write expansion = 4x");
}

// ── criterion 9: energy model ───────────────────────────────────────────

#[test]
fn criterion_09_energy_model() {
    let mut cfg = perf_sim::SystemConfig::default();
    cfg.gm_bandwidth = 1e9; // compute-bound
    let s = LayerShape::conv3x3(8, 32, 32, 128, 128);
    let wino = perf_sim::wino_layer_sim(&s, 4, &cfg).unwrap();
    let base = perf_sim::im2col_layer_sim(&s, &cfg).unwrap();
    let got = (wino.cube_busy_total as f64 * cfg.cube_power_wino_mw)
        / (base.cube_busy_total as f64 * cfg.cube_power_im2col_mw);
    let want = 0.25 * 1923.0 / 1521.0;
    assert!(
        (got - want).abs() / want <= 0.01,
        "cube energy ratio {got:.4} vs {want:.4}"
    );

    // zero-work input yields zero energy
    let empty = perf_sim::SimReport {
        kernel: perf_sim::Kernel::Im2col,
        shape: s,
        total_cycles: 0,
        weight_phase_cycles: 0,
        steady_cycles: 0,
        drain_cycles: 0,
        busy: Default::default(),
        traffic: Default::default(),
        steady_gm: Default::default(),
        bottleneck: perf_sim::Bottleneck::Cube,
        cube_busy_total: 0,
        energy_pj: 0.0,
        macs_per_cycle: 0.0,
    };
    assert_eq!(perf_sim::energy_estimate(&empty, &cfg), 0.0);
    println!("[criterion 9] PASS: cube energy ratio = (1/4)(1923/1521) ± 1%; zero work = zero energy");
}

// ── criterion 10: determinism ───────────────────────────────────────────

#[test]
fn criterion_10_determinism() {
    let mut cfg = perf_sim::SystemConfig::default();
    cfg.seed = 1234;
    let s = LayerShape::conv3x3(2, 32, 32, 64, 128);
    let a = perf_sim::wino_layer_sim(&s, 4, &cfg).unwrap().to_json();
    let b = perf_sim::wino_layer_sim(&s, 4, &cfg).unwrap().to_json();
    assert_eq!(a.as_bytes(), b.as_bytes());

    let layers = vec![(s, perf_sim::AlgoChoice::ALL.to_vec())];
    let n1 = serde_json::to_string(&perf_sim::network_sim(&layers, &cfg).unwrap()).unwrap();
    let n2 = serde_json::to_string(&perf_sim::network_sim(&layers, &cfg).unwrap()).unwrap();
    assert_eq!(n1.as_bytes(), n2.as_bytes());

    // calibration + quantized pipeline are seed-stable end to end
    let run = || {
        let mut rng = XorShift64Star::new(99);
        let ts = make_transform_set(4).unwrap();
        let x = random_i8(vec![1, 8, 8, 8], &mut rng);
        let w = random_i8(vec![4, 8, 3, 3], &mut rng);
        let mut st = CalibState::new(6, 0.9).unwrap();
        st.update_weight_taps(&w, &ts).unwrap();
        let sg = st
            .scales_from_maxima(10, ScaleRole::SG)
            .unwrap()
            .pow2_round();
        let sb = TapScaleMatrix::uniform(6, 1.0, ScaleRole::SB).unwrap();
        let y = quantized_winograd_conv2d(
            &x,
            &w,
            &ts,
            &sb,
            &sg,
            10,
            Padding::Same,
            RescaleBackend::Shift,
        )
        .unwrap();
        y.to_f64_vec().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
    println!("[criterion 10] PASS: identical seeds give byte-identical reports");
}
