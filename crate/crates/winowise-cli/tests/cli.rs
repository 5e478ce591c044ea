//! End-to-end CLI checks through the compiled binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use tensor_io::{read_tensor, write_tensor, Layout, Tensor, XorShift64Star};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_winowise"))
}

fn gen(dir: &Path, name: &str, shape: &str, dtype: &str, seed: u64) -> PathBuf {
    let out = dir.join(name);
    let st = bin()
        .args([
            "gen",
            "--shape",
            shape,
            "--dtype",
            dtype,
            "--seed",
            &seed.to_string(),
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    out
}

#[test]
fn gen_is_reproducible_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.wtns", "1,4,6,6", "i8", 9);
    let b = gen(dir.path(), "b.wtns", "1,4,6,6", "i8", 9);
    let c = gen(dir.path(), "c.wtns", "1,4,6,6", "i8", 10);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn conv_verify_exact_integer_path() {
    let dir = tempfile::tempdir().unwrap();
    let x = gen(dir.path(), "x.wtns", "1,3,12,12", "i8", 1);
    let w = gen(dir.path(), "w.wtns", "4,3,3,3", "i8", 2);
    let out = dir.path().join("y.wtns");
    for m in ["2", "4"] {
        let st = bin()
            .args(["conv", "--m", m, "--verify", "--input"])
            .arg(&x)
            .arg("--weights")
            .arg(&w)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(st.success(), "m={m}");
    }
    let y = read_tensor(&out).unwrap();
    assert_eq!(y.shape(), &[1, 4, 12, 12]);
}

#[test]
fn conv_verify_float_path_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let x = gen(dir.path(), "x.wtns", "1,2,8,8", "f64", 5);
    let w = gen(dir.path(), "w.wtns", "3,2,3,3", "f64", 6);
    let st = bin()
        .args(["conv", "--m", "4", "--verify", "--input"])
        .arg(&x)
        .arg("--weights")
        .arg(&w)
        .status()
        .unwrap();
    assert!(st.success());
}

#[test]
fn identity_kernel_output_equals_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = XorShift64Star::new(17);
    let c = 2usize;
    let data: Vec<i8> = (0..c * 64).map(|_| rng.next_i8()).collect();
    let x = Tensor::from_i8(vec![1, c, 8, 8], Layout::Nchw, data.clone()).unwrap();
    let xp = dir.path().join("x.wtns");
    write_tensor(&x, &xp).unwrap();

    let mut wd = vec![0i8; c * c * 9];
    for i in 0..c {
        wd[(i * c + i) * 9 + 4] = 1;
    }
    let w = Tensor::from_i8(vec![c, c, 3, 3], Layout::Nchw, wd).unwrap();
    let wp = dir.path().join("w.wtns");
    write_tensor(&w, &wp).unwrap();

    let out = dir.path().join("y.wtns");
    let st = bin()
        .args(["conv", "--m", "4", "--padding", "same", "--input"])
        .arg(&xp)
        .arg("--weights")
        .arg(&wp)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let y = read_tensor(&out).unwrap();
    let got: Vec<i8> = y.as_i32().unwrap().iter().map(|&v| v as i8).collect();
    assert_eq!(got, data);
}

#[test]
fn missing_weight_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let x = gen(dir.path(), "x.wtns", "1,1,4,4", "i8", 0);
    let st = bin()
        .args(["conv", "--input"])
        .arg(&x)
        .arg("--weights")
        .arg(dir.path().join("nope.wtns"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn quantized_conv_runs_with_on_the_fly_pow2_scales() {
    let dir = tempfile::tempdir().unwrap();
    let x = gen(dir.path(), "x.wtns", "1,8,8,8", "i8", 3);
    let w = gen(dir.path(), "w.wtns", "4,8,3,3", "i8", 4);
    let out = dir.path().join("yq.wtns");
    let st = bin()
        .args([
            "conv",
            "--m",
            "4",
            "--quant",
            "--wino-bits",
            "10",
            "--scales",
            "tapwise-pow2",
            "--verify",
            "--input",
        ])
        .arg(&x)
        .arg("--weights")
        .arg(&w)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(read_tensor(&out).unwrap().shape(), &[1, 4, 8, 8]);
}

#[test]
fn calibrate_writes_scales_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let x = gen(dir.path(), "x.wtns", "2,4,8,8", "f64", 11);
    let w = gen(dir.path(), "w.wtns", "4,4,3,3", "i8", 12);
    let prefix = dir.path().join("cal");
    let st = bin()
        .args(["calibrate", "--m", "4", "--wino-bits", "10", "--weights"])
        .arg(&w)
        .arg("--input")
        .arg(&x)
        .arg("--out-prefix")
        .arg(&prefix)
        .status()
        .unwrap();
    assert!(st.success());

    let sb = read_tensor(dir.path().join("cal_sb.wtns")).unwrap();
    assert_eq!(sb.shape(), &[6, 6]);
    // pow2 output: every entry is a power of two
    for &v in sb.as_f64().unwrap() {
        assert!(v > 0.0 && v.log2().fract() == 0.0, "{v} not a power of two");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cal_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["batches"], 1);
    assert!(summary["sb_pow2_shifts"].is_array());

    // single batch with plain tapwise scales: s == max/2^{n-1}
    let prefix2 = dir.path().join("cal2");
    let st = bin()
        .args([
            "calibrate",
            "--m",
            "4",
            "--wino-bits",
            "10",
            "--scales",
            "tapwise",
            "--weights",
        ])
        .arg(&w)
        .arg("--input")
        .arg(&x)
        .arg("--out-prefix")
        .arg(&prefix2)
        .status()
        .unwrap();
    assert!(st.success());
    let ts = winograd_core::make_transform_set(4).unwrap();
    let xt = read_tensor(&x).unwrap();
    let taps = winograd_core::winograd_input_taps(&xt, &ts, tensor_io::Padding::Same).unwrap();
    let mut st_x = tapwise_quant::CalibState::new(6, 0.9).unwrap();
    st_x.update_taps(&taps).unwrap();
    let want = st_x
        .scales_from_maxima(10, tapwise_quant::ScaleRole::SB)
        .unwrap();
    let got = read_tensor(dir.path().join("cal2_sb.wtns")).unwrap();
    for (a, b) in got.as_f64().unwrap().iter().zip(want.values()) {
        assert_eq!(a, b);
    }
}

#[test]
fn calibrate_two_batches_applies_the_decayed_update() {
    let dir = tempfile::tempdir().unwrap();
    let x1 = gen(dir.path(), "x1.wtns", "1,2,8,8", "f64", 31);
    let x2 = gen(dir.path(), "x2.wtns", "1,2,8,8", "f64", 32);
    let w = gen(dir.path(), "w.wtns", "2,2,3,3", "i8", 33);
    let prefix = dir.path().join("two");
    let st = bin()
        .args([
            "calibrate",
            "--m",
            "4",
            "--wino-bits",
            "10",
            "--decay",
            "0.9",
            "--scales",
            "tapwise",
            "--weights",
        ])
        .arg(&w)
        .arg("--input")
        .arg(&x1)
        .arg("--input")
        .arg(&x2)
        .arg("--out-prefix")
        .arg(&prefix)
        .status()
        .unwrap();
    assert!(st.success());

    // hand-rolled two-step running-average over the same tap batches
    let ts = winograd_core::make_transform_set(4).unwrap();
    let pad = tensor_io::Padding::Same;
    let per_tap_max = |p: &std::path::Path| {
        let t = read_tensor(p).unwrap();
        let taps = winograd_core::winograd_input_taps(&t, &ts, pad).unwrap();
        let d = taps.to_f64_vec();
        let per: usize = taps.shape()[1..].iter().product();
        (0..36)
            .map(|tap| {
                d[tap * per..(tap + 1) * per]
                    .iter()
                    .fold(0.0f64, |a, &v| a.max(v.abs()))
            })
            .collect::<Vec<f64>>()
    };
    let (m1, m2) = (per_tap_max(&x1), per_tap_max(&x2));
    let got = read_tensor(dir.path().join("two_sb.wtns")).unwrap();
    for (i, s) in got.as_f64().unwrap().iter().enumerate() {
        let running = 0.9 * m1[i] + 0.1 * m2[i];
        let want = if running > 0.0 {
            running / 512.0
        } else {
            2f64.powi(-10)
        };
        assert!((s - want).abs() < 1e-12, "tap {i}: {s} vs {want}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("two_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["batches"], 2);
}

#[test]
fn quant_error_all_emits_eight_reports() {
    let dir = tempfile::tempdir().unwrap();
    let w = gen(dir.path(), "w.wtns", "4,4,3,3", "f64", 21);
    let out = dir.path().join("reports.json");
    let st = bin()
        .args(["quant-error", "--strategy", "all", "--domain", "both", "--weights"])
        .arg(&w)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let reports: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 8);
}

#[test]
fn simulate_grid_is_deterministic_and_covers_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a");
    let p2 = dir.path().join("b");
    for p in [&p1, &p2] {
        let st = bin()
            .args(["simulate", "--grid", "--m", "4", "--seed", "42", "--out-prefix"])
            .arg(p)
            .status()
            .unwrap();
        assert!(st.success());
    }
    let a = std::fs::read(dir.path().join("a_speedup.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b_speedup.csv")).unwrap();
    assert_eq!(a, b, "same seed must give byte-identical reports");

    let text = String::from_utf8(a).unwrap();
    let rows = text.lines().count() - 1;
    assert!(rows >= 27, "grid should have at least 27 cells, got {rows}");
    let bd = std::fs::read_to_string(dir.path().join("a_breakdown.csv")).unwrap();
    // every breakdown row sums to ~100
    for line in bd.lines().skip(1) {
        let pcts: Vec<f64> = line
            .split(',')
            .skip(5)
            .map(|v| v.parse::<f64>().unwrap())
            .collect();
        let sum: f64 = pcts.iter().sum();
        assert!((sum - 100.0).abs() < 0.1, "{line}");
    }
}

#[test]
fn simulate_network_selects_kernels() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    std::fs::write(
        &net,
        r#"[
            {"batch":1,"h":64,"w":64,"c_in":64,"c_out":64,"kernel":3,"stride":1,"padding":"same"},
            {"batch":1,"h":64,"w":64,"c_in":64,"c_out":128,"kernel":1,"stride":1,"padding":"same"},
            {"batch":1,"h":8,"w":8,"c_in":512,"c_out":512,"kernel":3,"stride":1,"padding":"same"}
        ]"#,
    )
    .unwrap();
    let prefix = dir.path().join("net");
    let st = bin()
        .args(["simulate", "--network"])
        .arg(&net)
        .arg("--out-prefix")
        .arg(&prefix)
        .status()
        .unwrap();
    assert!(st.success());
    let csv = std::fs::read_to_string(dir.path().join("net_layers.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].contains("WinoF4"), "large layer should pick F4: {}", lines[1]);
    assert!(lines[2].contains("Im2col"), "1x1 layer must use im2col: {}", lines[2]);
}

#[test]
fn simulate_rejects_bad_config_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfgp = dir.path().join("cfg.json");
    std::fs::write(&cfgp, "{ not json").unwrap();
    let st = bin()
        .args(["simulate", "--grid", "--config"])
        .arg(&cfgp)
        .arg("--out-prefix")
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn emitted_tensors_are_re_readable() {
    let dir = tempfile::tempdir().unwrap();
    let x = gen(dir.path(), "x.wtns", "1,2,6,6", "i8", 1);
    let w = gen(dir.path(), "w.wtns", "2,2,3,3", "i8", 2);
    let out = dir.path().join("y.wtns");
    let st = bin()
        .args(["conv", "--m", "2", "--input"])
        .arg(&x)
        .arg("--weights")
        .arg(&w)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let y = read_tensor(&out).unwrap();
    assert_eq!(y.dtype(), tensor_io::Dtype::I32);
}
