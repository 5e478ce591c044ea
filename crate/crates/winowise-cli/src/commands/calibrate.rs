use clap::Args;
use serde::Serialize;
use std::path::PathBuf;
use tapwise_quant::{CalibState, ScaleRole, TapScaleMatrix};
use tensor_io::{read_tensor, write_tensor, Padding, Tensor};
use winograd_core::{make_transform_set, winograd_input_taps};

use crate::util::{parse_m, write_atomic, CliError, CliResult};

#[derive(Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// Input batch tensor files, streamed in order.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(8..=10))]
    pub wino_bits: u32,
    #[arg(long, default_value_t = 0.9)]
    pub decay: f64,
    #[arg(long, default_value = "same")]
    pub padding: String,
    /// Also emit power-of-two rounded variants.
    #[arg(long, default_value = "tapwise-pow2")]
    pub scales: String,
    /// Output prefix; writes `<prefix>_sb.wtns`, `<prefix>_sg.wtns` and a JSON summary.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Serialize)]
struct Summary {
    m: usize,
    wino_bits: u32,
    decay: f64,
    batches: u64,
    sb_pow2_shifts: Option<Vec<i32>>,
    sg_pow2_shifts: Option<Vec<i32>>,
}

pub fn run(args: CalibrateArgs) -> CliResult {
    let m = parse_m(args.m)?;
    let padding = match args.padding.as_str() {
        "same" => Padding::Same,
        "valid" => Padding::Valid,
        other => return Err(CliError::Usage(format!("unknown padding {other}"))),
    };
    let ts = make_transform_set(m)?;
    let t = ts.t();
    let weights = read_tensor(&args.weights)?;

    let mut st_x = CalibState::new(t, args.decay)?;
    for path in &args.inputs {
        let batch = read_tensor(path)?;
        let batch = Tensor::from_f64(batch.shape().to_vec(), batch.layout(), batch.to_f64_vec())?;
        let taps = winograd_input_taps(&batch, &ts, padding)?;
        st_x.update_taps(&taps)?;
    }
    let mut st_w = CalibState::new(t, args.decay)?;
    st_w.update_weight_taps(&weights, &ts)?;

    let s_b = st_x.scales_from_maxima(args.wino_bits, ScaleRole::SB)?;
    let s_g = st_w.scales_from_maxima(args.wino_bits, ScaleRole::SG)?;
    let pow2 = args.scales == "tapwise-pow2";
    let (s_b, s_g) = if pow2 {
        (s_b.pow2_round(), s_g.pow2_round())
    } else {
        (s_b, s_g)
    };

    let sb_path = suffixed(&args.out_prefix, "_sb.wtns");
    let sg_path = suffixed(&args.out_prefix, "_sg.wtns");
    write_tensor(&s_b.to_tensor(), &sb_path)?;
    write_tensor(&s_g.to_tensor(), &sg_path)?;

    let summary = Summary {
        m,
        wino_bits: args.wino_bits,
        decay: args.decay,
        batches: st_x.count(),
        sb_pow2_shifts: shifts(&s_b),
        sg_pow2_shifts: shifts(&s_g),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(CliError::usage)?;
    let summary_path = suffixed(&args.out_prefix, "_summary.json");
    write_atomic(&summary_path, &json)?;
    println!(
        "wrote {}, {}, {}",
        sb_path.display(),
        sg_path.display(),
        summary_path.display()
    );
    Ok(())
}

fn shifts(s: &TapScaleMatrix) -> Option<Vec<i32>> {
    s.log2_shifts().ok()
}

fn suffixed(prefix: &std::path::Path, suffix: &str) -> PathBuf {
    let mut os = prefix.as_os_str().to_owned();
    os.push(suffix);
    PathBuf::from(os)
}
