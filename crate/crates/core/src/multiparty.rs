//! The m-party chain E1 → E2 → … → Em.
//!
//! E1 commits to a value in `0..modulus`; every other party guesses, and the
//! chain output is `(commit + Σ guesses) mod modulus`.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{
    run_engine, AbortReason, AxisMode, Backend, Behavior, Calibration, EngineConfig, Honest, Naming, Party,
    PauliWeights, RunRecord, Transcript,
};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    /// Party count, E1 included.
    pub parties: usize,
    /// Retained block per receiver, E2 first. A single entry is used for
    /// every receiver.
    pub blocks: Vec<usize>,
    /// Total pairs; `None` uses the smallest budget that fits.
    pub total_pairs: Option<usize>,
    pub modulus: u32,
    pub verify_fraction: f64,
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

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            parties: 3,
            blocks: alloc::vec![20],
            total_pairs: None,
            modulus: 2,
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

/// Named chain set-ups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Three parties generating a bit.
    Trio,
    /// Six parties generating a number in 0..6.
    SixGods,
}

impl core::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trio" => Ok(Preset::Trio),
            "six-gods" => Ok(Preset::SixGods),
            _ => Err(Error::Config(alloc::format!("unknown preset {s:?}"))),
        }
    }
}

impl ChainConfig {
    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::Trio => ChainConfig::default(),
            Preset::SixGods => ChainConfig { parties: 6, modulus: 6, blocks: alloc::vec![12], ..ChainConfig::default() },
        }
    }

    pub fn block_sizes(&self) -> Result<Vec<usize>> {
        if self.parties < 2 {
            return Err(Error::Config(alloc::format!("need at least 2 parties, got {}", self.parties)));
        }
        let receivers = self.parties - 1;
        match self.blocks.len() {
            1 => Ok(alloc::vec![self.blocks[0]; receivers]),
            k if k == receivers => Ok(self.blocks.clone()),
            k => Err(Error::Config(alloc::format!("{k} block sizes for {receivers} receivers"))),
        }
    }

    /// Pairs needed when `total_pairs` is left open.
    pub fn minimal_pairs(&self) -> Result<usize> {
        let blocks = self.block_sizes()?;
        if !(0.0..1.0).contains(&self.verify_fraction) {
            return Err(Error::Config(alloc::format!("verify_fraction {} outside [0, 1)", self.verify_fraction)));
        }
        let ratio = self.verify_fraction / (1.0 - self.verify_fraction);
        let checks: usize = blocks.iter().map(|&b| libm::ceil(ratio * b as f64 - 1e-9) as usize).sum();
        Ok(self.rotational_checks + checks + blocks.iter().sum::<usize>())
    }

    pub fn validate(&self) -> Result<()> {
        self.engine().map(|_| ())
    }

    pub(crate) fn engine(&self) -> Result<EngineConfig> {
        if self.modulus < 2 {
            return Err(Error::Config(alloc::format!("modulus must be at least 2, got {}", self.modulus)));
        }
        let blocks = self.block_sizes()?;
        if let Some(&b) = blocks.iter().find(|&&b| b < self.modulus as usize) {
            return Err(Error::Config(alloc::format!("block of {b} pairs cannot encode {} values", self.modulus)));
        }
        let total = match self.total_pairs {
            Some(t) => t,
            None => self.minimal_pairs()?,
        };
        EngineConfig::build(
            Naming::Chain,
            self.modulus,
            total,
            blocks,
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub committed: u32,
    pub guesses: Vec<u32>,
    /// Per receiver; `None` when it did not get to match or failed.
    pub recovered: Vec<Option<u32>>,
    pub output: Option<u32>,
    pub abort: Option<AbortReason>,
    pub aborted_by: Option<Party>,
    pub disputed: bool,
}

impl From<&RunRecord> for ChainResult {
    fn from(rec: &RunRecord) -> Self {
        let mut recovered = rec.recovered();
        recovered.resize(rec.input_guesses.len(), None);
        let mut guesses = rec.input_guesses.clone();
        for (g, r) in guesses.iter_mut().zip(&rec.receivers) {
            *g = r.guess;
        }
        ChainResult {
            committed: rec.committed,
            guesses,
            recovered,
            output: rec.output,
            abort: rec.abort.map(|(_, r)| r),
            aborted_by: rec.abort.map(|(p, _)| p),
            disputed: rec.disputed,
        }
    }
}

/// `(commit + Σ guesses) mod modulus`.
pub fn output_rule(commit: u32, guesses: &[u32], modulus: u32) -> Result<u32> {
    if modulus < 2 {
        return Err(Error::InvalidArgument(alloc::format!("modulus {modulus} below 2")));
    }
    let mut acc = 0u64;
    for &v in core::iter::once(&commit).chain(guesses) {
        if v >= modulus {
            return Err(Error::OutOfRange { value: v, bound: modulus });
        }
        acc += u64::from(v);
    }
    Ok((acc % u64::from(modulus)) as u32)
}

pub fn run_chain(cfg: &ChainConfig, commit: u32, guesses: &[u32]) -> Result<(ChainResult, Transcript)> {
    let rec = run_chain_with(cfg, 0, commit, guesses, &mut Honest)?;
    Ok((ChainResult::from(&rec), rec.transcript))
}

pub fn run_chain_with(
    cfg: &ChainConfig,
    index: u64,
    commit: u32,
    guesses: &[u32],
    behavior: &mut dyn Behavior,
) -> Result<RunRecord> {
    let engine = cfg.engine()?;
    run_engine(&engine, index, commit, guesses, behavior)
}

/// Uniform inputs for chain run `index`.
pub fn chain_inputs(cfg: &ChainConfig, index: u64) -> (u32, Vec<u32>) {
    let mut r = rng::named(cfg.seed, index, Stream::Inputs);
    let m = cfg.modulus.max(1);
    let commit = r.random_range(0..m);
    let guesses = (1..cfg.parties).map(|_| r.random_range(0..m)).collect();
    (commit, guesses)
}

/// Runs `count` chains with uniform inputs; run `i` uses index `i`.
pub fn run_chains(cfg: &ChainConfig, count: usize) -> Result<Vec<ChainResult>> {
    let engine = cfg.engine()?;
    (0..count as u64)
        .map(|i| {
            let (c, g) = chain_inputs(cfg, i);
            run_engine(&engine, i, c, &g, &mut Honest).map(|r| ChainResult::from(&r))
        })
        .collect()
}
