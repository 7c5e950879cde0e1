use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::message::Naming;
use super::physics::Backend;
use crate::encoding::noisy_threshold;
use crate::error::{Error, Result};
use crate::qsim::PauliOp;

/// Axes used for the receivers' singlet checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisMode {
    FixedZ,
    #[default]
    RandomAxes,
}

/// Noise-calibration loop parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Calibration {
    /// Accepted trace distance of the ensemble estimate to `¼𝐈`.
    pub target_tol: f64,
    /// Depolarizing increment per iteration.
    pub step: f64,
    pub max_iter: usize,
    /// Shots per Pauli setting for the tomographic estimate; `None` uses the
    /// exact ensemble.
    pub shots: Option<usize>,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration { target_tol: 0.05, step: 0.01, max_iter: 100, shots: None }
    }
}

/// Probabilities with which a party's unitary machine applies `I, X, Y, Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliWeights(pub [f64; 4]);

impl Default for PauliWeights {
    fn default() -> Self {
        PauliWeights([0.25; 4])
    }
}

impl PauliWeights {
    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.0.iter().sum();
        if self.0.iter().any(|w| w.is_nan() || *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("Pauli weights {:?} are not a distribution", self.0)));
        }
        Ok(())
    }

    pub fn weight(&self, p: PauliOp) -> f64 {
        match p {
            PauliOp::I => self.0[0],
            PauliOp::X => self.0[1],
            PauliOp::Y => self.0[2],
            PauliOp::Z => self.0[3],
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.0.iter().all(|&w| (w - 0.25).abs() < 1e-15)
    }
}

/// Parameters of a two-party session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    /// `N`, the singlets Alice starts with.
    pub total_pairs: usize,
    /// `n`, the pairs Bob keeps for the commitment.
    pub retained: usize,
    /// Fraction of the pairs Bob handles (checked + kept) that he checks.
    pub verify_fraction: f64,
    pub axis_mode: AxisMode,
    /// Accepted noise level (depolarizing probability per party).
    pub p_acc: f64,
    /// Fixed mismatch threshold; `None` uses the mode default.
    pub max_mismatch: Option<f64>,
    pub seed: u64,
    pub noisy: bool,
    pub backend: Backend,
    /// Pairs Alice sacrifices to her own rotational-symmetry check.
    pub rotational_checks: usize,
    pub pauli_weights: PauliWeights,
    pub calibration: Calibration,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            total_pairs: 50,
            retained: 20,
            verify_fraction: 0.5,
            axis_mode: AxisMode::RandomAxes,
            p_acc: 0.0,
            max_mismatch: None,
            seed: 0,
            noisy: false,
            backend: Backend::Matrix,
            rotational_checks: 10,
            pauli_weights: PauliWeights::default(),
            calibration: Calibration::default(),
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        self.engine().map(|_| ())
    }

    pub(crate) fn engine(&self) -> Result<EngineConfig> {
        if self.retained == 0 || self.retained >= self.total_pairs {
            return Err(Error::Config(format!(
                "need 0 < n < N (n = {}, N = {})",
                self.retained, self.total_pairs
            )));
        }
        EngineConfig::build(
            Naming::Session,
            2,
            self.total_pairs,
            alloc::vec![self.retained],
            self.verify_fraction,
            self.axis_mode,
            self.p_acc,
            self.max_mismatch,
            self.seed,
            self.noisy,
            self.backend,
            self.rotational_checks,
            self.pauli_weights,
            self.calibration.clone(),
        )
    }
}

/// Resolved run parameters shared by sessions and chains.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct EngineConfig {
    pub naming: Naming,
    pub parties: usize,
    pub modulus: u32,
    pub total_pairs: usize,
    /// Retained block size per receiver (index 0 = E2 / Bob).
    pub blocks: Vec<usize>,
    /// Checked pairs per receiver.
    pub checks: Vec<usize>,
    pub axis_mode: AxisMode,
    pub p_acc: f64,
    pub max_mismatch: Option<f64>,
    pub seed: u64,
    pub noisy: bool,
    pub backend: Backend,
    pub rotational_checks: usize,
    pub pauli_weights: PauliWeights,
    pub calibration: Calibration,
}

impl EngineConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        naming: Naming,
        modulus: u32,
        total_pairs: usize,
        blocks: Vec<usize>,
        verify_fraction: f64,
        axis_mode: AxisMode,
        p_acc: f64,
        max_mismatch: Option<f64>,
        seed: u64,
        noisy: bool,
        backend: Backend,
        rotational_checks: usize,
        pauli_weights: PauliWeights,
        calibration: Calibration,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&verify_fraction) {
            return Err(Error::Config(format!("verify_fraction {verify_fraction} outside [0, 1)")));
        }
        if !(0.0..2.0 / 3.0).contains(&p_acc) {
            return Err(Error::Config(format!("p_acc {p_acc} outside [0, 2/3)")));
        }
        if let Some(t) = max_mismatch {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Config(format!("max_mismatch {t} outside [0, 1]")));
            }
        }
        if blocks.contains(&0) {
            return Err(Error::Config("every receiver must keep at least one pair".into()));
        }
        if calibration.step <= 0.0 || calibration.target_tol < 0.0 {
            return Err(Error::Config("calibration step must be positive".into()));
        }
        pauli_weights.validate()?;
        let ratio = verify_fraction / (1.0 - verify_fraction);
        let mut checks: Vec<usize> = blocks.iter().map(|&b| libm::ceil(ratio * b as f64 - 1e-9) as usize).collect();
        let needed = rotational_checks + blocks.iter().sum::<usize>() + checks.iter().sum::<usize>();
        if needed > total_pairs {
            return Err(Error::Config(format!(
                "{total_pairs} pairs cannot cover {rotational_checks} rotational checks, blocks {blocks:?} and receiver checks {checks:?}"
            )));
        }
        // spare pairs are checked by the last receiver
        if let Some(last) = checks.last_mut() {
            *last += total_pairs - needed;
        }
        Ok(EngineConfig {
            naming,
            parties: blocks.len() + 1,
            modulus,
            total_pairs,
            blocks,
            checks,
            axis_mode,
            p_acc,
            max_mismatch,
            seed,
            noisy,
            backend,
            rotational_checks,
            pauli_weights,
            calibration,
        })
    }

    /// Mismatch threshold for a sample of `size` positions.
    pub fn threshold(&self, size: usize) -> f64 {
        match self.max_mismatch {
            Some(t) => t,
            None if self.noisy && size > 0 => noisy_threshold(self.p_acc, size),
            None => 0.0,
        }
    }
}
