use clap::Args;
use std::path::PathBuf;
use tapwise_quant::{quant_error_report, Domain, Strategy};
use tensor_io::read_tensor;
use winograd_core::make_transform_set;

use crate::util::{parse_m, write_atomic, CliError, CliResult};

#[derive(Args)]
pub struct QuantErrorArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// layer | channel | tap | channel-and-tap | all
    #[arg(long, default_value = "all")]
    pub strategy: String,
    /// spatial | winograd | both
    #[arg(long, default_value = "both")]
    pub domain: String,
    #[arg(long, default_value_t = 8)]
    pub bits: u32,
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: QuantErrorArgs) -> CliResult {
    let m = parse_m(args.m)?;
    let ts = make_transform_set(m)?;
    let weights = read_tensor(&args.weights)?;
    let weights = tensor_io::Tensor::from_f64(
        weights.shape().to_vec(),
        weights.layout(),
        weights.to_f64_vec(),
    )?;

    let strategies: Vec<Strategy> = match args.strategy.as_str() {
        "all" => Strategy::ALL.to_vec(),
        "layer" => vec![Strategy::Layer],
        "channel" => vec![Strategy::Channel],
        "tap" => vec![Strategy::Tap],
        "channel-and-tap" => vec![Strategy::ChannelAndTap],
        other => return Err(CliError::Usage(format!("unknown strategy {other}"))),
    };
    let domains: Vec<Domain> = match args.domain.as_str() {
        "both" => vec![Domain::Spatial, Domain::Winograd],
        "spatial" => vec![Domain::Spatial],
        "winograd" => vec![Domain::Winograd],
        other => return Err(CliError::Usage(format!("unknown domain {other}"))),
    };

    let mut reports = Vec::new();
    for &domain in &domains {
        for &strategy in &strategies {
            let ts_opt = (domain == Domain::Winograd).then_some(&ts);
            let rep = quant_error_report(&weights, strategy, domain, args.bits, ts_opt)?;
            println!(
                "{:?}/{:?}: mean log2 rel error {:.3}",
                domain, strategy, rep.mean_log2_rel_error
            );
            reports.push(rep);
        }
    }
    let json = serde_json::to_string_pretty(&reports).map_err(CliError::usage)?;
    write_atomic(&args.out, &json)?;
    println!("wrote {} ({} reports)", args.out.display(), reports.len());
    Ok(())
}
