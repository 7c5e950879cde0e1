//! Self-describing runs: the parameters and inputs that regenerate a
//! transcript, and the check that a transcript is exactly what they produce.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiparty::{run_chain_with, ChainConfig, ChainResult};
use crate::protocol::{run_session_with, validate, Honest, Naming, SessionConfig, SessionResult, Transcript};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "lowercase")]
pub enum RunSpec {
    Session { config: SessionConfig, index: u64, commit: u32, guess: u32 },
    Chain { config: ChainConfig, index: u64, commit: u32, guesses: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RunOutcome {
    Session(SessionResult),
    Chain(ChainResult),
}

impl RunOutcome {
    pub fn aborted(&self) -> bool {
        match self {
            RunOutcome::Session(r) => r.abort.is_some(),
            RunOutcome::Chain(r) => r.abort.is_some(),
        }
    }
}

impl RunSpec {
    pub fn naming(&self) -> Naming {
        match self {
            RunSpec::Session { .. } => Naming::Session,
            RunSpec::Chain { .. } => Naming::Chain,
        }
    }

    pub fn parties(&self) -> usize {
        match self {
            RunSpec::Session { .. } => 2,
            RunSpec::Chain { config, .. } => config.parties,
        }
    }

    /// Runs the honest protocol the spec describes.
    pub fn execute(&self) -> Result<(RunOutcome, Transcript)> {
        match self {
            RunSpec::Session { config, index, commit, guess } => {
                let rec = run_session_with(config, *index, *commit, *guess, &mut Honest)?;
                Ok((RunOutcome::Session(SessionResult::from(&rec)), rec.transcript))
            }
            RunSpec::Chain { config, index, commit, guesses } => {
                let rec = run_chain_with(config, *index, *commit, guesses, &mut Honest)?;
                Ok((RunOutcome::Chain(ChainResult::from(&rec)), rec.transcript))
            }
        }
    }
}

/// Validates `transcript`, re-executes `spec` and requires the regenerated
/// transcript to be identical; returns the regenerated result.
pub fn replay(spec: &RunSpec, transcript: &Transcript) -> Result<RunOutcome> {
    validate(transcript, spec.parties(), spec.naming())?;
    let (outcome, fresh) = spec.execute()?;
    for (i, (got, want)) in transcript.entries().iter().zip(fresh.entries()).enumerate() {
        if got != want {
            return Err(Error::Transcript { index: i, reason: format!("differs from the regenerated entry {want:?}") });
        }
    }
    if transcript.len() != fresh.len() {
        return Err(Error::Transcript {
            index: transcript.len().min(fresh.len()),
            reason: format!("{} entries, the run produces {}", transcript.len(), fresh.len()),
        });
    }
    Ok(outcome)
}
