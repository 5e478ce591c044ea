use serde::{Deserialize, Serialize};

/// On-chip memory capacities in bytes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MemSizes {
    pub l0a: u64,
    pub l0b: u64,
    pub l0c: u64,
    pub l1: u64,
}

impl Default for MemSizes {
    fn default() -> Self {
        MemSizes {
            l0a: 64 * 1024,
            l0b: 64 * 1024,
            l0c: 288 * 1024,
            l1: 1248 * 1024,
        }
    }
}

/// System parameters. Defaults follow the published 2-core configuration:
/// 16×32×16 int8 cube per core at 500 MHz, 81.2 B/cycle of external
/// bandwidth, 150-cycle average memory latency with Gaussian jitter of
/// stddev √5, and the area/power table of the 28 nm implementation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    pub num_cores: u32,
    /// Cube MACs per cycle per core (16×32 by 16).
    pub cube_macs_per_cycle: u64,
    /// Cube output tile rows/cols (the M and N of one cube step).
    pub cube_m: u64,
    pub cube_k: u64,
    pub cube_n: u64,
    /// External bandwidth, bytes per core-clock cycle, shared by all cores.
    pub gm_bandwidth: f64,
    /// Average external latency in core cycles.
    pub gm_latency: f64,
    /// Stddev of the Gaussian latency jitter (cycles).
    pub gm_jitter_std: f64,
    pub mem: MemSizes,
    /// L1 bytes reserved for staging buffers outside the weight/iFM tiles.
    pub l1_reserve: u64,
    /// iFMs are broadcast to both cores by the broadcast unit.
    pub broadcast: bool,
    pub clock_mhz: f64,
    pub seed: u64,

    // unit powers (mW), per Table-V-style breakdown
    pub cube_power_im2col_mw: f64,
    pub cube_power_wino_mw: f64,
    pub in_xform_power_mw: f64,
    pub wt_xform_power_mw: f64,
    pub out_xform_power_mw: f64,
    pub im2col_engine_power_mw: f64,
    /// Not broken out in the published table; kept configurable.
    pub vector_power_mw: f64,

    // per-access energies (pJ/B)
    pub l0a_rd_pj: f64,
    pub l0a_wr_pj: f64,
    pub l0b_rd_pj: f64,
    pub l0b_wr_pj: f64,
    pub l0c_rd_a_pj: f64,
    pub l0c_wr_pj: f64,
    pub l0c_rd_b_im2col_pj: f64,
    pub l0c_rd_b_wino_pj: f64,
    pub l1_rd_pj: f64,
    pub l1_wr_pj: f64,
    /// External memory energy is outside the core-level budget by default.
    pub gm_pj_per_byte: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            num_cores: 2,
            cube_macs_per_cycle: 16 * 32 * 16,
            cube_m: 16,
            cube_k: 32,
            cube_n: 16,
            gm_bandwidth: 81.2,
            gm_latency: 150.0,
            gm_jitter_std: 5f64.sqrt(),
            mem: MemSizes::default(),
            l1_reserve: 32 * 1024,
            broadcast: true,
            clock_mhz: 500.0,
            seed: 0,
            cube_power_im2col_mw: 1521.0,
            cube_power_wino_mw: 1923.0,
            in_xform_power_mw: 145.0,
            wt_xform_power_mw: 228.0,
            out_xform_power_mw: 114.0,
            im2col_engine_power_mw: 30.0,
            vector_power_mw: 0.0,
            l0a_rd_pj: 0.22,
            l0a_wr_pj: 0.24,
            l0b_rd_pj: 0.22,
            l0b_wr_pj: 0.24,
            l0c_rd_a_pj: 0.23,
            l0c_wr_pj: 0.29,
            l0c_rd_b_im2col_pj: 0.31,
            l0c_rd_b_wino_pj: 0.69,
            l1_rd_pj: 0.92,
            l1_wr_pj: 0.68,
            gm_pj_per_byte: 0.0,
        }
    }
}

impl SystemConfig {
    pub fn from_json(s: &str) -> crate::Result<Self> {
        let cfg: SystemConfig =
            serde_json::from_str(s).map_err(|e| crate::SimError::BadConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.gm_bandwidth <= 0.0 {
            return Err(crate::SimError::BadConfig("bandwidth must be > 0".into()));
        }
        if self.num_cores == 0 {
            return Err(crate::SimError::BadConfig("need at least one core".into()));
        }
        if self.mem.l0a == 0 || self.mem.l0b == 0 || self.mem.l0c == 0 || self.mem.l1 == 0 {
            return Err(crate::SimError::BadConfig("memory sizes must be > 0".into()));
        }
        Ok(())
    }

    pub fn cycle_ns(&self) -> f64 {
        1000.0 / self.clock_mhz
    }
}
