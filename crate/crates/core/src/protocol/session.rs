//! The two-party Alice–Bob session.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::behavior::{Behavior, Honest};
use super::config::SessionConfig;
use super::engine::{self, RunRecord};
use super::message::{AbortReason, Party, Transcript};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub committed: u32,
    pub guessed: u32,
    /// `None` when the session aborted before or at the match.
    pub recovered: Option<u32>,
    pub output: Option<u32>,
    pub abort: Option<AbortReason>,
    pub aborted_by: Option<Party>,
    /// Bob's step-5 error rate (0 when he never checked).
    pub entanglement_check_error_rate: f64,
    /// Mismatch fraction per candidate value, once Bob matched.
    pub mismatch: Vec<f64>,
    /// Alice disagrees with Bob's announcement.
    pub disputed: bool,
}

impl SessionResult {
    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }
}

impl From<&RunRecord> for SessionResult {
    fn from(rec: &RunRecord) -> Self {
        let bob = rec.receivers.first();
        SessionResult {
            committed: rec.committed,
            guessed: bob.map_or(rec.input_guesses[0], |b| b.guess),
            recovered: bob.and_then(|b| b.report.as_ref()).and_then(|r| r.recovered),
            output: rec.output,
            abort: rec.abort.map(|(_, r)| r),
            aborted_by: rec.abort.map(|(p, _)| p),
            entanglement_check_error_rate: bob.and_then(|b| b.check).map_or(0.0, |c| c.error_rate),
            mismatch: bob.and_then(|b| b.report.as_ref()).map_or_else(Vec::new, |r| r.mismatch.clone()),
            disputed: rec.disputed,
        }
    }
}

fn check_bit(v: u32) -> Result<()> {
    if v > 1 {
        return Err(Error::OutOfRange { value: v, bound: 2 });
    }
    Ok(())
}

/// Runs one honest session (run index 0).
pub fn run_session(cfg: &SessionConfig, commit: u32, guess: u32) -> Result<(SessionResult, Transcript)> {
    let rec = run_session_with(cfg, 0, commit, guess, &mut Honest)?;
    Ok((SessionResult::from(&rec), rec.transcript))
}

/// Runs session number `index` of the seed's stream family with the given
/// party behavior and returns the full record.
pub fn run_session_with(
    cfg: &SessionConfig,
    index: u64,
    commit: u32,
    guess: u32,
    behavior: &mut dyn Behavior,
) -> Result<RunRecord> {
    check_bit(commit)?;
    check_bit(guess)?;
    let engine_cfg = cfg.engine()?;
    engine::run(&engine_cfg, index, commit, &[guess], behavior)
}

/// Where batch inputs come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputSource {
    /// Fresh uniform bit per session.
    Uniform,
    Fixed(u32),
}

impl InputSource {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> u32 {
        match self {
            InputSource::Uniform => rng.random_range(0..2),
            InputSource::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    /// Outputs of the non-aborted sessions, in order.
    pub output: Vec<u32>,
    pub sessions: Vec<SessionResult>,
}

impl BatchResult {
    pub fn aborts(&self) -> usize {
        self.sessions.iter().filter(|s| s.aborted()).count()
    }
}

/// Inputs of session `index` in a batch.
pub fn batch_inputs(cfg: &SessionConfig, index: u64, commits: InputSource, guesses: InputSource) -> (u32, u32) {
    let mut r = rng::named(cfg.seed, index, Stream::Inputs);
    let c = commits.draw(&mut r);
    let g = guesses.draw(&mut r);
    (c, g)
}

/// Runs `count` independent sessions; session `i` uses run index `i`.
pub fn run_batch(cfg: &SessionConfig, count: usize, commits: InputSource, guesses: InputSource) -> Result<BatchResult> {
    run_batch_with(cfg, count, commits, guesses, &mut Honest)
}

pub fn run_batch_with(
    cfg: &SessionConfig,
    count: usize,
    commits: InputSource,
    guesses: InputSource,
    behavior: &mut dyn Behavior,
) -> Result<BatchResult> {
    if count == 0 {
        return Err(Error::InvalidArgument("batch needs at least one session".into()));
    }
    for s in [commits, guesses] {
        if let InputSource::Fixed(v) = s {
            check_bit(v)?;
        }
    }
    let engine_cfg = cfg.engine()?;
    let mut sessions = Vec::with_capacity(count);
    let mut output = Vec::new();
    for i in 0..count as u64 {
        let (c, g) = batch_inputs(cfg, i, commits, guesses);
        let rec = engine::run(&engine_cfg, i, c, &[g], behavior)?;
        let res = SessionResult::from(&rec);
        if let Some(o) = res.output {
            output.push(o);
        }
        sessions.push(res);
    }
    Ok(BatchResult { output, sessions })
}
