use clap::Args;
use serde::Deserialize;
use std::path::PathBuf;

use perf_sim::{
    breakdown, im2col_layer_sim, network_sim, wino_layer_sim, AlgoChoice, SimReport, SystemConfig,
};
use tensor_io::LayerShape;

use crate::util::{parse_m, write_atomic, CliError, CliResult};

#[derive(Args)]
pub struct SimulateArgs {
    /// System config JSON; defaults to the published 2-core system.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sweep the published layer grid (resolutions × channel pairs × batch).
    #[arg(long)]
    pub grid: bool,
    /// Network JSON: [{"batch":..,"h":..,"w":..,"c_in":..,"c_out":..,
    /// "kernel":3,"stride":1,"algos":["im2col","wino_f4"]}, ...]
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Deserialize)]
struct NetLayer {
    #[serde(flatten)]
    shape: LayerShape,
    #[serde(default)]
    algos: Vec<AlgoChoice>,
}

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
const GRID_BATCH: [usize; 2] = [1, 8];

pub fn run(args: SimulateArgs) -> CliResult {
    let m = parse_m(args.m)?;
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(CliError::usage)?;
            SystemConfig::from_json(&text)?
        }
        None => SystemConfig::default(),
    };
    cfg.seed = args.seed;

    if args.grid == args.network.is_some() {
        return Err(CliError::Usage(
            "pass exactly one of --grid or --network".into(),
        ));
    }

    if args.grid {
        run_grid(m, &cfg, &args.out_prefix)
    } else {
        run_network(args.network.as_ref().unwrap(), &cfg, &args.out_prefix)
    }
}

fn run_grid(m: usize, cfg: &SystemConfig, prefix: &std::path::Path) -> CliResult {
    let mut speedups = String::from("batch,h_w,c_in,c_out,im2col_cycles,wino_cycles,speedup\n");
    let mut breakdowns = String::from(
        "batch,h_w,c_in,c_out,kernel,wt_transfer_xform,ifm_transfer,input_xform,cube,output_xform_vector,ofm_write\n",
    );
    for b in GRID_BATCH {
        for res in GRID_RES {
            for (ci, co) in GRID_PAIRS {
                let shape = LayerShape::conv3x3(b, res, res, ci, co);
                let base = im2col_layer_sim(&shape, cfg)?;
                let wino = wino_layer_sim(&shape, m, cfg)?;
                speedups.push_str(&format!(
                    "{b},{res},{ci},{co},{},{},{:.4}\n",
                    base.total_cycles,
                    wino.total_cycles,
                    base.total_cycles as f64 / wino.total_cycles as f64
                ));
                for r in [&base, &wino] {
                    breakdowns.push_str(&breakdown_row(b, res, ci, co, r));
                }
            }
        }
    }
    let sp_path = suffixed(prefix, "_speedup.csv");
    let bd_path = suffixed(prefix, "_breakdown.csv");
    write_atomic(&sp_path, &speedups)?;
    write_atomic(&bd_path, &breakdowns)?;
    println!("wrote {} and {}", sp_path.display(), bd_path.display());
    Ok(())
}

fn breakdown_row(b: usize, res: usize, ci: usize, co: usize, r: &SimReport) -> String {
    let parts = breakdown(r);
    let pct: Vec<String> = parts.iter().map(|p| format!("{:.2}", p.percent)).collect();
    format!(
        "{b},{res},{ci},{co},{:?},{}\n",
        r.kernel,
        pct.join(",")
    )
}

fn run_network(path: &std::path::Path, cfg: &SystemConfig, prefix: &std::path::Path) -> CliResult {
    let text = std::fs::read_to_string(path).map_err(CliError::usage)?;
    let layers: Vec<NetLayer> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("network JSON: {e}")))?;
    let spec: Vec<(LayerShape, Vec<AlgoChoice>)> = layers
        .into_iter()
        .map(|l| {
            let algos = if l.algos.is_empty() {
                AlgoChoice::ALL.to_vec()
            } else {
                l.algos
            };
            (l.shape, algos)
        })
        .collect();
    let report = network_sim(&spec, cfg)?;

    let mut csv = String::from("batch,h,w,c_in,c_out,kernel_size,chosen,cycles,energy_pj\n");
    for l in &report.layers {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{:?},{},{:.1}\n",
            l.shape.batch,
            l.shape.h,
            l.shape.w,
            l.shape.c_in,
            l.shape.c_out,
            l.shape.kernel,
            l.chosen,
            l.cycles,
            l.energy_pj
        ));
    }
    let csv_path = suffixed(prefix, "_layers.csv");
    let json_path = suffixed(prefix, "_network.json");
    write_atomic(&csv_path, &csv)?;
    let json = serde_json::to_string_pretty(&report).map_err(CliError::usage)?;
    write_atomic(&json_path, &json)?;
    println!(
        "total cycles {}, energy {:.3e} pJ -> {}, {}",
        report.total_cycles,
        report.total_energy_pj,
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

fn suffixed(prefix: &std::path::Path, suffix: &str) -> PathBuf {
    let mut os = prefix.as_os_str().to_owned();
    os.push(suffix);
    PathBuf::from(os)
}
