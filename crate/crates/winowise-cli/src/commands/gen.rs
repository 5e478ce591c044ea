use clap::Args;
use tensor_io::{write_tensor, Layout, Tensor, TensorData, XorShift64Star};

use crate::util::{CliError, CliResult};

#[derive(Args)]
pub struct GenArgs {
    /// Comma-separated extents, e.g. 1,64,32,32
    #[arg(long)]
    pub shape: String,
    #[arg(long, default_value = "i8")]
    pub dtype: String,
    #[arg(long, default_value = "nchw")]
    pub layout: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Value range for f64 tensors, as lo,hi
    #[arg(long, default_value = "-1,1")]
    pub range: String,
    #[arg(long)]
    pub out: std::path::PathBuf,
}

pub fn run(args: GenArgs) -> CliResult {
    let shape: Vec<usize> = args
        .shape
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("bad --shape: {e}")))?;
    let layout = match args.layout.as_str() {
        "nchw" => Layout::Nchw,
        "fractal" => Layout::Fractal,
        "matrix" => Layout::Matrix,
        other => return Err(CliError::Usage(format!("unknown layout {other}"))),
    };
    let count: usize = shape.iter().product();
    let mut rng = XorShift64Star::new(args.seed);

    let data = match args.dtype.as_str() {
        "i8" => TensorData::I8((0..count).map(|_| rng.next_i8()).collect()),
        "f64" => {
            let (lo, hi) = args
                .range
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
                .ok_or_else(|| CliError::Usage("bad --range, expected lo,hi".into()))?;
            TensorData::F64((0..count).map(|_| rng.next_range(lo, hi)).collect())
        }
        other => return Err(CliError::Usage(format!("unsupported dtype {other}"))),
    };
    let t = Tensor::new(shape, layout, data)?;
    write_tensor(&t, &args.out)?;
    println!("wrote {} ({} elements)", args.out.display(), t.len());
    Ok(())
}
