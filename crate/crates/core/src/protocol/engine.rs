//! The sequential m-party engine behind both the two-party session and the
//! chain protocol. Party 0 commits; parties `1..m` receive in chain order.

use alloc::vec::Vec;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::behavior::{Behavior, CommitView, GuessView};
use super::calibration::{draw_paulis, noise_suppress, pauli_twirl};
use super::config::{AxisMode, EngineConfig};
use super::message::{AbortReason, Message, Naming, Party, Transcript};
use super::physics::{Backend, LabelBackend, MatrixBackend, PairBackend};
use crate::encoding::{encode_reveal, match_commit, reconstruct_arrangement, within_threshold, MatchReport, PermutationScheme};
use crate::error::{arg, Error, Result};
use crate::qsim::{average_state, Axis, MeasOutcome, PauliOp, Side};
use crate::rng::{self, SimRng, Stream};

/// Result of a batch of singlet checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub pass: bool,
    pub error_rate: f64,
    pub checked: usize,
}

impl CheckResult {
    fn message(&self) -> Message {
        Message::CheckResult { pass: self.pass, error_rate: self.error_rate, checked: self.checked }
    }
}

/// Measures both qubits of each listed pair along a common axis and counts
/// outcomes that are not anti-correlated.
pub fn verify_singlets<B: PairBackend>(
    backend: &mut B,
    positions: &[usize],
    axis_mode: AxisMode,
    max_mismatch: f64,
    axis_rng: &mut SimRng,
    physics: &mut SimRng,
) -> Result<CheckResult> {
    let mut errors = 0;
    for &pos in positions {
        let axis = match axis_mode {
            AxisMode::FixedZ => Axis::Z,
            AxisMode::RandomAxes => Axis::random(axis_rng),
        };
        let a = backend.measure(pos, Side::A, &axis, physics)?;
        let b = backend.measure(pos, Side::B, &axis, physics)?;
        if a == b {
            errors += 1;
        }
    }
    let checked = positions.len();
    let error_rate = if checked == 0 { 0.0 } else { errors as f64 / checked as f64 };
    Ok(CheckResult { pass: within_threshold(errors, checked, max_mismatch), error_rate, checked })
}

/// Everything one receiver saw and computed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverRecord {
    pub party: Party,
    /// Retained positions, in order.
    pub block: Vec<usize>,
    pub checked: Vec<usize>,
    pub check: Option<CheckResult>,
    /// Own Pauli layer on the block.
    pub own_layer: Vec<PauliOp>,
    /// Layers of the intermediate parties between the committer and this
    /// receiver, restricted to the block.
    pub intermediate_layers: Vec<Vec<PauliOp>>,
    pub revealed: Vec<MeasOutcome>,
    pub outcomes: Vec<MeasOutcome>,
    pub guess: u32,
    /// Committer layer as disclosed on the block.
    pub unveiled: Vec<PauliOp>,
    pub scheme: PermutationScheme,
    pub threshold: f64,
    pub report: Option<MatchReport>,
    pub output: Option<u32>,
}

impl ReceiverRecord {
    /// Repeats the step-11 match with a different committer disclosure,
    /// e.g. a corrected one sent after deliberately wrong information.
    pub fn rematch(&self, committer_layer: &[PauliOp]) -> Result<MatchReport> {
        let mut others = self.intermediate_layers.clone();
        others.push(self.own_layer.clone());
        let arr = reconstruct_arrangement(committer_layer, &others)?;
        match_commit(&self.revealed, &self.outcomes, &arr, &self.scheme, self.threshold)
    }
}

/// The committer's private record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommitterRecord {
    pub rotational_check: Option<CheckResult>,
    /// True layer on each receiver's block.
    pub layers: Vec<Vec<PauliOp>>,
    /// z outcomes on each receiver's block.
    pub outcomes: Vec<Vec<MeasOutcome>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub transcript: Transcript,
    pub committed: u32,
    pub input_guesses: Vec<u32>,
    pub committer: CommitterRecord,
    pub receivers: Vec<ReceiverRecord>,
    pub abort: Option<(Party, AbortReason)>,
    pub output: Option<u32>,
    pub disputed: bool,
    /// Calibration noise applied by each party (0 = committer).
    pub calibration_noise: Vec<f64>,
}

impl RunRecord {
    pub fn guesses(&self) -> Vec<u32> {
        self.receivers.iter().map(|r| r.guess).collect()
    }

    pub fn recovered(&self) -> Vec<Option<u32>> {
        self.receivers.iter().map(|r| r.report.as_ref().and_then(|m| m.recovered)).collect()
    }
}

pub(crate) fn run(
    cfg: &EngineConfig,
    index: u64,
    commit: u32,
    guesses: &[u32],
    behavior: &mut dyn Behavior,
) -> Result<RunRecord> {
    if commit >= cfg.modulus {
        return Err(Error::OutOfRange { value: commit, bound: cfg.modulus });
    }
    if guesses.len() != cfg.parties - 1 {
        return Err(Error::LengthMismatch { expected: cfg.parties - 1, got: guesses.len() });
    }
    if let Some(&g) = guesses.iter().find(|&&g| g >= cfg.modulus) {
        return Err(Error::OutOfRange { value: g, bound: cfg.modulus });
    }
    match cfg.backend {
        Backend::Matrix => Engine::<MatrixBackend>::new(cfg, index, commit, guesses, behavior).execute(),
        Backend::Label => Engine::<LabelBackend>::new(cfg, index, commit, guesses, behavior).execute(),
    }
}

struct Engine<'a, B: PairBackend> {
    cfg: &'a EngineConfig,
    behavior: &'a mut dyn Behavior,
    pairs: B,
    physics: SimRng,
    committer_rng: SimRng,
    receiver_rngs: Vec<SimRng>,
    adversary_rng: SimRng,
    /// `layers[k][pos]`: Pauli party `k` applied at `pos`.
    layers: Vec<Vec<PauliOp>>,
    record: RunRecord,
}

impl<'a, B: PairBackend> Engine<'a, B> {
    fn new(cfg: &'a EngineConfig, index: u64, commit: u32, guesses: &[u32], behavior: &'a mut dyn Behavior) -> Self {
        let seed = cfg.seed;
        Engine {
            cfg,
            behavior,
            pairs: B::singlets(cfg.total_pairs),
            physics: rng::named(seed, index, Stream::Physics),
            committer_rng: rng::named(seed, index, Stream::First),
            receiver_rngs: (1..cfg.parties).map(|j| rng::receiver(seed, index, j)).collect(),
            adversary_rng: rng::named(seed, index, Stream::Adversary),
            layers: alloc::vec![alloc::vec![PauliOp::I; cfg.total_pairs]; cfg.parties],
            record: RunRecord {
                transcript: Transcript::new(),
                committed: commit,
                input_guesses: guesses.to_vec(),
                committer: CommitterRecord::default(),
                receivers: Vec::new(),
                abort: None,
                output: None,
                disputed: false,
                calibration_noise: alloc::vec![0.0; cfg.parties],
            },
        }
    }

    fn party(&self, i: usize) -> Party {
        self.cfg.naming.party(i)
    }

    fn send(&mut self, step: u8, from: usize, to: Option<usize>, message: Message) {
        let to = match self.cfg.naming {
            Naming::Session => None,
            Naming::Chain => to.map(|t| self.party(t)),
        };
        let from = self.party(from);
        self.record.transcript.push(step, from, to, message);
    }

    fn abort(mut self, step: u8, who: usize, reason: AbortReason) -> Result<RunRecord> {
        self.send(step, who, None, Message::Abort { reason });
        self.record.abort = Some((self.party(who), reason));
        Ok(self.record)
    }

    fn side(party: usize) -> Side {
        if party == 0 {
            Side::A
        } else {
            Side::B
        }
    }

    fn inject_noise(&mut self, party: usize, positions: &[usize]) -> Result<()> {
        if !self.cfg.noisy || self.cfg.p_acc == 0.0 || !self.behavior.injects_noise(party) {
            return Ok(());
        }
        for &pos in positions {
            self.pairs.depolarize(pos, Self::side(party), self.cfg.p_acc, &mut self.physics)?;
        }
        Ok(())
    }

    /// Draws and applies party `party`'s Pauli layer, then calibrates.
    /// Returns `false` when calibration fails.
    fn prepare_mixture(&mut self, party: usize, positions: &[usize]) -> Result<bool> {
        let side = Self::side(party);
        let rng = if party == 0 { &mut self.committer_rng } else { &mut self.receiver_rngs[party - 1] };
        let paulis = draw_paulis(positions.len(), &self.cfg.pauli_weights, rng);
        let mut q = 0.0;
        if self.cfg.noisy && !positions.is_empty() {
            let states: Vec<_> = positions.iter().map(|&p| self.pairs.state(p)).collect();
            let ensemble = crate::qsim::PairState::new(average_state(&states)?)?;
            let twirled = pauli_twirl(&ensemble, side, &self.cfg.pauli_weights);
            let rng = if party == 0 { &mut self.committer_rng } else { &mut self.receiver_rngs[party - 1] };
            match noise_suppress(&twirled, side, &self.cfg.calibration, rng) {
                Ok(level) => q = level,
                Err(_) => return Ok(false),
            }
        }
        for (&pos, &p) in positions.iter().zip(&paulis) {
            self.layers[party][pos] = p;
            self.pairs.apply_pauli(pos, side, p);
            if q > 0.0 {
                self.pairs.depolarize(pos, side, q, &mut self.physics)?;
            }
        }
        self.record.calibration_noise[party] = q;
        Ok(true)
    }

    fn execute(mut self) -> Result<RunRecord> {
        let cfg = self.cfg;
        let m = cfg.parties;

        // 1: rotational-symmetry check on a random sample of fresh singlets
        let mut sacrificed: Vec<usize> = sample(&mut self.committer_rng, cfg.total_pairs, cfg.rotational_checks).into_vec();
        sacrificed.sort_unstable();
        let check = verify_singlets(
            &mut self.pairs,
            &sacrificed,
            AxisMode::RandomAxes,
            cfg.threshold(sacrificed.len()),
            &mut self.committer_rng,
            &mut self.physics,
        )?;
        self.record.committer.rotational_check = Some(check);
        self.send(1, 0, None, check.message());
        if !check.pass {
            return self.abort(1, 0, AbortReason::Entanglement);
        }
        let live: Vec<usize> = (0..cfg.total_pairs).filter(|p| sacrificed.binary_search(p).is_err()).collect();

        // 2: committer noise, Pauli layer, calibration; B qubits go out
        self.inject_noise(0, &live)?;
        if !self.prepare_mixture(0, &live)? {
            return self.abort(2, 0, AbortReason::Calibration);
        }
        self.send(2, 0, Some(1), Message::ParticleBatch { positions: live.clone() });

        let mut received = live;
        for r in 1..m {
            let rec_i = r - 1;
            self.inject_noise(r, &received)?;

            // 3: the receiver picks pairs to check
            let want = cfg.checks[rec_i].min(received.len());
            let mut picks: Vec<usize> = sample(&mut self.receiver_rngs[rec_i], received.len(), want).into_vec();
            picks.sort_unstable();
            let checked: Vec<usize> = picks.iter().map(|&i| received[i]).collect();
            self.send(3, r, Some(0), Message::SingletCheckRequest { positions: checked.clone() });

            // 4: every predecessor undoes its layer on the checked pairs
            for k in 0..r {
                for &pos in &checked {
                    let p = self.layers[k][pos];
                    self.pairs.apply_pauli(pos, Self::side(k), p);
                }
                self.send(4, k, Some(r), Message::ReturnParticles { positions: checked.clone() });
            }
            if self.behavior.tamper_checks(r) {
                for &pos in &checked {
                    use rand::Rng;
                    let a = MeasOutcome::from_bool(self.adversary_rng.random());
                    let b = MeasOutcome::from_bool(self.adversary_rng.random());
                    self.pairs.set_product(pos, a, b);
                }
            }

            // 5: same-axis measurements on the returned pairs
            let result = verify_singlets(
                &mut self.pairs,
                &checked,
                cfg.axis_mode,
                cfg.threshold(checked.len()),
                &mut self.receiver_rngs[rec_i],
                &mut self.physics,
            )?;
            self.send(5, r, None, result.message());
            let rest: Vec<usize> = received.iter().copied().filter(|p| checked.binary_search(p).is_err()).collect();
            let block: Vec<usize> = rest[..cfg.blocks[rec_i]].to_vec();
            let forward: Vec<usize> = rest[cfg.blocks[rec_i]..].to_vec();
            let scheme = PermutationScheme::new(cfg.modulus, block.len())?;
            self.record.receivers.push(ReceiverRecord {
                party: self.party(r),
                block: block.clone(),
                checked,
                check: Some(result),
                own_layer: Vec::new(),
                intermediate_layers: Vec::new(),
                revealed: Vec::new(),
                outcomes: Vec::new(),
                guess: self.record.input_guesses[rec_i],
                unveiled: Vec::new(),
                scheme,
                threshold: cfg.threshold(block.len()),
                report: None,
                output: None,
            });
            if !result.pass {
                return self.abort(5, r, AbortReason::Entanglement);
            }

            // 6: own layer on everything still held, keep the block
            if !self.prepare_mixture(r, &rest)? {
                return self.abort(6, r, AbortReason::Calibration);
            }
            let own_layer: Vec<PauliOp> = block.iter().map(|&p| self.layers[r][p]).collect();
            self.record.receivers[rec_i].own_layer = own_layer;
            if self.behavior.early_measure(r) {
                let mut outs = Vec::with_capacity(block.len());
                for &pos in &block {
                    outs.push(self.pairs.measure(pos, Side::B, &Axis::Z, &mut self.physics)?);
                }
                self.record.receivers[rec_i].outcomes = outs;
            }
            if r + 1 < m {
                self.send(6, r, Some(r + 1), Message::ParticleBatch { positions: forward.clone() });
            }
            received = forward;
        }

        // 7: the committer measures every retained pair along z
        for rec_i in 0..m - 1 {
            let block = self.record.receivers[rec_i].block.clone();
            let mut outs = Vec::with_capacity(block.len());
            for &pos in &block {
                outs.push(self.pairs.measure(pos, Side::A, &Axis::Z, &mut self.physics)?);
            }
            self.record.committer.layers.push(block.iter().map(|&p| self.layers[0][p]).collect());
            self.record.committer.outcomes.push(outs);
        }

        // 8: reveal outcomes in the committed order
        let commit = self.record.committed;
        for rec_i in 0..m - 1 {
            let scheme = self.record.receivers[rec_i].scheme;
            let revealed = encode_reveal(&self.record.committer.outcomes[rec_i], commit, &scheme)?;
            self.record.receivers[rec_i].revealed = revealed.clone();
            self.send(8, 0, Some(rec_i + 1), Message::CommitReveal { outcomes: revealed });
        }

        // 9: guesses
        for rec_i in 0..m - 1 {
            let rec = &self.record.receivers[rec_i];
            let view = GuessView {
                receiver: rec_i + 1,
                own_layer: &rec.own_layer,
                early_outcomes: (!rec.outcomes.is_empty()).then_some(&rec.outcomes[..]),
                revealed: &rec.revealed,
                scheme: rec.scheme,
                input_guess: rec.guess,
            };
            let g = self.behavior.guess(&view, &mut self.adversary_rng);
            if g >= cfg.modulus {
                return Err(Error::OutOfRange { value: g, bound: cfg.modulus });
            }
            self.record.receivers[rec_i].guess = g;
            self.send(9, rec_i + 1, Some(0), Message::GuessBit { value: g });
        }

        // 10: the committer unveils, then each intermediate in chain order
        let mut positions = Vec::new();
        let mut paulis = Vec::new();
        for rec_i in 0..m - 1 {
            let rec = &self.record.receivers[rec_i];
            let view = CommitView {
                receiver: rec_i + 1,
                commit,
                outcomes: &self.record.committer.outcomes[rec_i],
                layer: &self.record.committer.layers[rec_i],
                revealed: &rec.revealed,
                scheme: rec.scheme,
                max_mismatch: rec.threshold,
            };
            let disclosed = self.behavior.unveil(&view, &mut self.adversary_rng);
            if disclosed.len() != rec.block.len() {
                return Err(arg("unveiled list must cover the receiver's block"));
            }
            positions.extend_from_slice(&rec.block);
            paulis.extend_from_slice(&disclosed);
            self.record.receivers[rec_i].unveiled = disclosed;
        }
        self.send(10, 0, None, Message::Unveil { positions, paulis });
        for k in 1..m - 1 {
            let mut positions = Vec::new();
            let mut paulis = Vec::new();
            for rec_i in k..m - 1 {
                let block = self.record.receivers[rec_i].block.clone();
                let layer: Vec<PauliOp> = block.iter().map(|&p| self.layers[k][p]).collect();
                positions.extend_from_slice(&block);
                paulis.extend_from_slice(&layer);
                self.record.receivers[rec_i].intermediate_layers.push(layer);
            }
            self.send(10, k, None, Message::Unveil { positions, paulis });
        }

        // 11: receivers measure, reconstruct and match
        for rec_i in 0..m - 1 {
            if self.record.receivers[rec_i].outcomes.is_empty() {
                let block = self.record.receivers[rec_i].block.clone();
                let mut outs = Vec::with_capacity(block.len());
                for &pos in &block {
                    outs.push(self.pairs.measure(pos, Side::B, &Axis::Z, &mut self.physics)?);
                }
                self.record.receivers[rec_i].outcomes = outs;
            }
            let rec = &self.record.receivers[rec_i];
            let report = rec.rematch(&rec.unveiled)?;
            let failed = report.recovered.is_none();
            let ambiguous = report.ambiguous;
            self.record.receivers[rec_i].report = Some(report);
            if failed {
                let reason = if ambiguous { AbortReason::Ambiguous } else { AbortReason::Mismatch };
                return self.abort(11, rec_i + 1, reason);
            }
        }

        // 12: announcements
        let guess_sum: u64 = self.record.receivers.iter().map(|r| u64::from(r.guess)).sum();
        let output_of = |value: u32, own_guess: u32| -> u32 {
            match cfg.naming {
                Naming::Session => u32::from(value == own_guess),
                Naming::Chain => ((u64::from(value) + guess_sum) % u64::from(cfg.modulus)) as u32,
            }
        };
        let mut outputs = Vec::new();
        for rec_i in 0..m - 1 {
            let rec = &self.record.receivers[rec_i];
            let value = rec.report.as_ref().and_then(|r| r.recovered).expect("matched above");
            let out = output_of(value, rec.guess);
            self.record.receivers[rec_i].output = Some(out);
            outputs.push(out);
            self.send(12, rec_i + 1, None, Message::OutputAnnounce { value: out });
        }
        let expected = output_of(commit, self.record.receivers[0].guess);
        self.record.disputed = outputs.iter().any(|&o| o != expected);
        if outputs.windows(2).all(|w| w[0] == w[1]) {
            self.record.output = outputs.first().copied();
        }
        Ok(self.record)
    }
}
