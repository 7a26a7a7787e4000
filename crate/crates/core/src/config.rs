//! Top-level pipeline configuration. Every section defaults to the values
//! the pipeline was tuned with; unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::diagnosis::DiagnosisConfig;
use crate::error::{Error, Result};
pub use crate::preprocess::PreprocessConfig;
pub use crate::prototype::PrototypeConfig;
pub use crate::screening::ScreeningConfig;
use crate::warp::WarpConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    /// Sampling rate assumed for CSV records, which carry no header.
    pub csv_sample_rate_hz: f64,
    /// Worker threads for record-level parallelism; 0 uses all cores.
    pub workers: usize,
}

impl Default for IoConfig {
    fn default() -> Self {
        Self {
            csv_sample_rate_hz: 500.0,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub rng_seed: u64,
    pub io: IoConfig,
    pub preprocess: PreprocessConfig,
    pub screening: ScreeningConfig,
    pub warp: WarpConfig,
    pub prototype: PrototypeConfig,
    pub diagnosis: DiagnosisConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.warp.validate()?;
        if !(self.io.csv_sample_rate_hz > 0.0) {
            return Err(Error::Config("io.csv_sample_rate_hz must be positive".into()));
        }
        if !(self.screening.vh_threshold > 0.0) {
            return Err(Error::Config("screening.vh_threshold must be positive".into()));
        }
        if self.prototype.max_rounds == 0 || self.prototype.smoothing_window == 0 {
            return Err(Error::Config("prototype.max_rounds and smoothing_window must be at least 1".into()));
        }
        if self.diagnosis.nearest_k == 0 || !(self.diagnosis.s_divisor > 0.0) {
            return Err(Error::Config("diagnosis.nearest_k and s_divisor must be positive".into()));
        }
        Ok(())
    }
}
