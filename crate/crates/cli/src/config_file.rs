//! Declarative run configuration (TOML). Every key is optional; unknown
//! keys are rejected. Command-line flags override file values.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use eprcommit::protocol::{AxisMode, Backend};
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    /// Retained pairs (per receiver in a chain).
    pub n: Option<usize>,
    /// Total pairs.
    #[serde(rename = "N")]
    pub total_pairs: Option<usize>,
    pub verify_fraction: Option<f64>,
    pub axis_mode: Option<AxisMode>,
    pub p_acc: Option<f64>,
    pub max_mismatch: Option<f64>,
    pub seed: Option<u64>,
    pub noisy: Option<bool>,
    pub backend: Option<Backend>,
    pub rotational_checks: Option<usize>,
    /// Chain party count.
    pub m: Option<usize>,
    pub modulus: Option<u32>,
    pub calibration_tol: Option<f64>,
    pub calibration_step: Option<f64>,
    pub calibration_max_iter: Option<usize>,
    pub calibration_shots: Option<usize>,
    /// Transcript output path.
    pub out: Option<PathBuf>,
    /// Result JSON path.
    pub result: Option<PathBuf>,
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}
