use std::path::Path;

/// Command outcomes that map onto the documented exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: a --verify check did not hold.
    Verification(String),
    /// Exit 2: bad arguments, missing or malformed files.
    Usage(String),
}

impl CliError {
    pub fn usage(msg: impl std::fmt::Display) -> Self {
        CliError::Usage(msg.to_string())
    }
}

impl From<tensor_io::TensorError> for CliError {
    fn from(e: tensor_io::TensorError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<winograd_core::WinogradError> for CliError {
    fn from(e: winograd_core::WinogradError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<tapwise_quant::QuantError> for CliError {
    fn from(e: tapwise_quant::QuantError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<perf_sim::SimError> for CliError {
    fn from(e: perf_sim::SimError) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult = Result<(), CliError>;

/// Atomic text-file write: temp + rename, so partial reports never land.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).map_err(CliError::usage)?;
    std::fs::rename(&tmp, path).map_err(CliError::usage)?;
    Ok(())
}

pub fn parse_m(m: usize) -> Result<usize, CliError> {
    if m == 2 || m == 4 {
        Ok(m)
    } else {
        Err(CliError::Usage(format!("--m must be 2 or 4, got {m}")))
    }
}
