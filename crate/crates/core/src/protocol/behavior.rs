//! Hooks through which a party may deviate from the honest protocol.
//!
//! The engine consults a [`Behavior`] at each decision a party could make
//! differently. [`Honest`] keeps every default. Deviations can only use what
//! the deviating party has in hand; the views below carry exactly that.

use alloc::vec::Vec;

use crate::encoding::PermutationScheme;
use crate::qsim::{MeasOutcome, PauliOp};
use crate::rng::SimRng;

/// What the committer knows when it unveils towards one receiver.
#[derive(Debug)]
pub struct CommitView<'a> {
    /// 1-based receiver index (Bob / E2 is 1).
    pub receiver: usize,
    pub commit: u32,
    /// The committer's z outcomes on the receiver's block, physical order.
    pub outcomes: &'a [MeasOutcome],
    /// The Pauli layer the committer really applied on the block.
    pub layer: &'a [PauliOp],
    /// What the committer revealed at step 8.
    pub revealed: &'a [MeasOutcome],
    pub scheme: PermutationScheme,
    pub max_mismatch: f64,
}

/// What a receiver knows when it announces its guess.
#[derive(Debug)]
pub struct GuessView<'a> {
    pub receiver: usize,
    pub own_layer: &'a [PauliOp],
    /// Own z outcomes when the receiver measured before the guess.
    pub early_outcomes: Option<&'a [MeasOutcome]>,
    pub revealed: &'a [MeasOutcome],
    pub scheme: PermutationScheme,
    /// The guess the receiver would send honestly.
    pub input_guess: u32,
}

pub trait Behavior {
    /// Whether protocol party `party` (0 = committer) injects its accepted
    /// noise in noisy mode.
    fn injects_noise(&self, _party: usize) -> bool {
        true
    }

    /// Whether the pairs checked by receiver `receiver` are swapped for
    /// random z-product states before the check.
    fn tamper_checks(&self, _receiver: usize) -> bool {
        false
    }

    /// Whether a receiver measures its block in z right after applying its
    /// own layer, before the committer measures.
    fn early_measure(&self, _receiver: usize) -> bool {
        false
    }

    fn guess(&mut self, view: &GuessView<'_>, _rng: &mut SimRng) -> u32 {
        view.input_guess
    }

    /// The Pauli list the committer discloses for one receiver's block.
    fn unveil(&mut self, view: &CommitView<'_>, _rng: &mut SimRng) -> Vec<PauliOp> {
        view.layer.to_vec()
    }
}

/// Every party follows the protocol.
#[derive(Debug, Clone, Copy, Default)]
pub struct Honest;

impl Behavior for Honest {}
