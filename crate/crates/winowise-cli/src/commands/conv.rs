use clap::Args;
use std::path::PathBuf;
use tapwise_quant::{RescaleBackend, ScaleRole, TapScaleMatrix};
use tensor_io::{read_tensor, write_tensor, Dtype, Padding, Tensor};
use winograd_core::{direct_conv2d, make_transform_set, winograd_conv2d};

use crate::util::{parse_m, CliError, CliResult};

#[derive(Args)]
pub struct ConvArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value = "same")]
    pub padding: String,
    /// Compare against the direct-convolution oracle.
    #[arg(long)]
    pub verify: bool,
    /// Run the integer pipeline with tap-wise requantization.
    #[arg(long)]
    pub quant: bool,
    /// Winograd-domain bits for --quant.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(8..=10))]
    pub wino_bits: u32,
    /// uniform | tapwise | tapwise-pow2 (for --quant)
    #[arg(long, default_value = "tapwise-pow2")]
    pub scales: String,
    /// Tap scale tensors from `winowise calibrate` (for --quant).
    #[arg(long)]
    pub sb: Option<PathBuf>,
    #[arg(long)]
    pub sg: Option<PathBuf>,
}

pub fn run(args: ConvArgs) -> CliResult {
    let m = parse_m(args.m)?;
    let padding = parse_padding(&args.padding)?;
    let x = read_tensor(&args.input)?;
    let w = read_tensor(&args.weights)?;
    let ts = make_transform_set(m)?;

    let out = if args.quant {
        let (s_b, s_g) = load_scales(&args, &ts, &x, &w, padding)?;
        let backend = if s_b.is_pow2() && s_g.is_pow2() {
            RescaleBackend::Shift
        } else {
            RescaleBackend::Float
        };
        let y = tapwise_quant::quantized_winograd_conv2d(
            &x, &w, &ts, &s_b, &s_g, args.wino_bits, padding, backend,
        )?;
        if args.verify {
            // report accuracy against the unquantized f64 winograd result
            let xf = to_f64(&x)?;
            let wf = to_f64(&w)?;
            let oracle = winograd_conv2d(&xf, &wf, &ts, padding)?;
            let (max_rel, mean_rel) = rel_errors(&y, &oracle);
            println!("quantized vs f64 winograd: max rel {max_rel:.3e}, mean rel {mean_rel:.3e}");
        }
        y
    } else {
        let y = winograd_conv2d(&x, &w, &ts, padding)?;
        if args.verify {
            let want = direct_conv2d(&x, &w, padding, 1)?;
            if x.dtype() == Dtype::F64 {
                let (max_rel, mean_rel) = rel_errors(&y, &want);
                println!("winograd vs direct: max rel {max_rel:.3e}, mean rel {mean_rel:.3e}");
                if max_rel > 1e-9 {
                    return Err(CliError::Verification(format!(
                        "float-mode relative error {max_rel:.3e} exceeds 1e-9"
                    )));
                }
            } else if y != want {
                return Err(CliError::Verification(
                    "exact-mode winograd output differs from direct convolution".into(),
                ));
            } else {
                println!("winograd vs direct: bit-exact");
            }
        }
        y
    };

    if let Some(path) = &args.out {
        write_tensor(&out, path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn parse_padding(s: &str) -> Result<Padding, CliError> {
    match s {
        "same" => Ok(Padding::Same),
        "valid" => Ok(Padding::Valid),
        other => Err(CliError::Usage(format!("unknown padding {other}"))),
    }
}

fn to_f64(t: &Tensor) -> Result<Tensor, CliError> {
    Ok(Tensor::from_f64(
        t.shape().to_vec(),
        t.layout(),
        t.to_f64_vec(),
    )?)
}

fn rel_errors(got: &Tensor, want: &Tensor) -> (f64, f64) {
    let g = got.to_f64_vec();
    let w = want.to_f64_vec();
    let scale = w.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-30);
    let mut max = 0.0f64;
    let mut sum = 0.0f64;
    for (a, b) in g.iter().zip(&w) {
        let e = (a - b).abs() / scale;
        max = max.max(e);
        sum += e;
    }
    (max, sum / w.len().max(1) as f64)
}

fn load_scales(
    args: &ConvArgs,
    ts: &winograd_core::TransformSet,
    x: &Tensor,
    w: &Tensor,
    padding: Padding,
) -> Result<(TapScaleMatrix, TapScaleMatrix), CliError> {
    if let (Some(sb), Some(sg)) = (&args.sb, &args.sg) {
        let s_b = TapScaleMatrix::from_tensor(&read_tensor(sb)?, ScaleRole::SB)?;
        let s_g = TapScaleMatrix::from_tensor(&read_tensor(sg)?, ScaleRole::SG)?;
        return Ok((s_b, s_g));
    }
    // no scale files: calibrate on the fly from this input/weight pair
    let t = ts.t();
    let mut st_x = tapwise_quant::CalibState::new(t, 0.9)?;
    let taps = winograd_core::winograd_input_taps(&to_f64(x)?, ts, padding)?;
    st_x.update_taps(&taps)?;
    let mut st_w = tapwise_quant::CalibState::new(t, 0.9)?;
    st_w.update_weight_taps(w, ts)?;

    match args.scales.as_str() {
        "uniform" => {
            let denom = (1u64 << (args.wino_bits - 1)) as f64;
            let mx = st_x.maxima().iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
            let mw = st_w.maxima().iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
            Ok((
                TapScaleMatrix::uniform(t, mx / denom, ScaleRole::SB)?.pow2_round(),
                TapScaleMatrix::uniform(t, mw / denom, ScaleRole::SG)?.pow2_round(),
            ))
        }
        "tapwise" => Ok((
            st_x.scales_from_maxima(args.wino_bits, ScaleRole::SB)?,
            st_w.scales_from_maxima(args.wino_bits, ScaleRole::SG)?,
        )),
        "tapwise-pow2" => Ok((
            st_x.scales_from_maxima(args.wino_bits, ScaleRole::SB)?.pow2_round(),
            st_w.scales_from_maxima(args.wino_bits, ScaleRole::SG)?.pow2_round(),
        )),
        other => Err(CliError::Usage(format!("unknown --scales {other}"))),
    }
}
