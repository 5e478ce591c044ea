//! Analytical performance and energy model of the dual-core accelerator with
//! Winograd transformation engines.
//!
//! The model is steady-state analytical rather than event-per-beat: each
//! phase of the dataflow (weight load + on-the-fly transform, double-buffered
//! steady state, drain) is costed from engine rates and memory traffic, and
//! the critical path is the slowest producer. Memory latency jitter is
//! Gaussian and seeded, so identical seeds give identical reports.

mod config;
mod engine;
mod network;
mod report;
mod schedule;
mod sim;

pub use config::{MemSizes, SystemConfig};
pub use engine::{xform_engine_rates, EngineKind, EngineRates, EngineSpec};
pub use network::{network_sim, speedup, AlgoChoice, LayerChoice, NetworkReport};
pub use report::{breakdown, energy_estimate, Bottleneck, Kernel, MemTraffic, SimReport, UnitBusy};
pub use schedule::shift_add_ops_2d;
pub use sim::{im2col_layer_sim, wino_layer_sim};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("infeasible mapping: {0}")]
    InfeasibleMapping(String),

    #[error("unsupported workload: {0}")]
    UnsupportedWorkload(String),

    #[error("bad configuration: {0}")]
    BadConfig(String),

    #[error(transparent)]
    Tensor(#[from] tensor_io::TensorError),
}

pub type Result<T> = std::result::Result<T, SimError>;
