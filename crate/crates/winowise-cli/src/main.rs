//! winowise: integer Winograd convolution with tap-wise power-of-two
//! quantization, plus the accelerator performance model.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or format error.

mod commands;
mod util;

use clap::{Parser, Subcommand};

use commands::{calibrate, conv, gen, quant_error, simulate};
use util::CliError;

#[derive(Parser)]
#[command(name = "winowise", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a (quantized) Winograd convolution on tensor files.
    Conv(conv::ConvArgs),
    /// Calibrate tap-wise scale matrices from weights and input batches.
    Calibrate(calibrate::CalibrateArgs),
    /// Quantization error study over strategies and domains.
    QuantError(quant_error::QuantErrorArgs),
    /// Throughput/energy model: layer grid or network selection.
    Simulate(simulate::SimulateArgs),
    /// Generate reproducible fixture tensors (xorshift64* stream).
    Gen(gen::GenArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Conv(args) => conv::run(args),
        Command::Calibrate(args) => calibrate::run(args),
        Command::QuantError(args) => quant_error::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Gen(args) => gen::run(args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
