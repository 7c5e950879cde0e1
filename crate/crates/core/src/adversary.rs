//! Cheating strategies and bias estimation for the two-party session.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{decode_reveal, match_commit, reconstruct_arrangement, PermutationScheme};
use crate::error::{arg, Error, Result};
use crate::protocol::{
    batch_inputs, run_session_with, Behavior, CommitView, GuessView, InputSource, PauliWeights, SessionConfig,
};
use crate::qsim::{c, zcorr, BellLabel, MeasOutcome, PairState, PauliOp, Side, C64};
use crate::rng::SimRng;

/// Minimum trial count for a normal-approximation interval.
pub const MIN_TRIALS: usize = 1000;
/// Largest block the exhaustive Unveil search accepts.
pub const MAX_EXHAUSTIVE_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Alice,
    Bob,
}

/// How Alice picks the Unveil list when trying to flip her commitment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipSearch {
    /// Discloses the true layer.
    HonestUnveil,
    /// Tries every list in `4^n` against Bob's decision rule.
    ExhaustiveSearch,
    /// Flips the z part of each disclosed Pauli wherever her own outcomes
    /// disagree with the target alignment.
    SignAdapt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    HonestBaseline,
    /// Measures his block right after step 6 and guesses the candidate with
    /// the best correlation between the reveal and his data.
    BobEarlyMeasure,
    BobRandomGuess,
    /// Guesses the parity of the number of `+1` entries in the reveal.
    BobRevealParity,
    AliceFlipAttempt(FlipSearch),
    /// Bob skips his own injected noise, then plays [`Strategy::BobEarlyMeasure`].
    BobNoiseDial,
    /// Alice skips her own injected noise, then claims the flipped value with
    /// her true layer.
    AliceNoiseDial,
}

impl Strategy {
    pub const NAMES: [&'static str; 9] = [
        "honest-baseline",
        "bob-early-measure",
        "bob-random-guess",
        "bob-reveal-parity",
        "alice-flip-honest-unveil",
        "alice-flip-exhaustive",
        "alice-flip-sign-adapt",
        "bob-noise-dial",
        "alice-noise-dial",
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::HonestBaseline => Self::NAMES[0],
            Strategy::BobEarlyMeasure => Self::NAMES[1],
            Strategy::BobRandomGuess => Self::NAMES[2],
            Strategy::BobRevealParity => Self::NAMES[3],
            Strategy::AliceFlipAttempt(FlipSearch::HonestUnveil) => Self::NAMES[4],
            Strategy::AliceFlipAttempt(FlipSearch::ExhaustiveSearch) => Self::NAMES[5],
            Strategy::AliceFlipAttempt(FlipSearch::SignAdapt) => Self::NAMES[6],
            Strategy::BobNoiseDial => Self::NAMES[7],
            Strategy::AliceNoiseDial => Self::NAMES[8],
        }
    }

    pub fn role(self) -> Role {
        match self {
            Strategy::HonestBaseline
            | Strategy::BobEarlyMeasure
            | Strategy::BobRandomGuess
            | Strategy::BobRevealParity
            | Strategy::BobNoiseDial => Role::Bob,
            Strategy::AliceFlipAttempt(_) | Strategy::AliceNoiseDial => Role::Alice,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "honest-baseline" => Strategy::HonestBaseline,
            "bob-early-measure" => Strategy::BobEarlyMeasure,
            "bob-random-guess" => Strategy::BobRandomGuess,
            "bob-reveal-parity" => Strategy::BobRevealParity,
            "alice-flip-honest-unveil" => Strategy::AliceFlipAttempt(FlipSearch::HonestUnveil),
            "alice-flip-exhaustive" => Strategy::AliceFlipAttempt(FlipSearch::ExhaustiveSearch),
            "alice-flip-sign-adapt" => Strategy::AliceFlipAttempt(FlipSearch::SignAdapt),
            "bob-noise-dial" => Strategy::BobNoiseDial,
            "alice-noise-dial" => Strategy::AliceNoiseDial,
            _ => {
                return Err(arg(alloc::format!(
                    "unknown strategy {s:?}; known: {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub strategy: String,
    pub trials: usize,
    /// Success fraction: correct guesses for Bob, flips for Alice.
    pub p_hat: f64,
    /// Half-width of the normal 95% interval.
    pub ci95: f64,
    /// `|p_hat − baseline|`.
    pub epsilon_hat: f64,
    /// Success rate of the ideal protocol: ½ for guessing, 0 for flipping.
    pub baseline: f64,
    /// Fraction of trials that ended in an abort.
    pub abort_rate: f64,
}

impl BiasReport {
    pub fn new(strategy: Strategy, successes: usize, aborts: usize, trials: usize) -> Self {
        let t = trials as f64;
        let p = successes as f64 / t;
        let baseline = match strategy.role() {
            Role::Bob => 0.5,
            Role::Alice => 0.0,
        };
        BiasReport {
            strategy: strategy.name().into(),
            trials,
            p_hat: p,
            ci95: 1.96 * libm::sqrt(p * (1.0 - p) / t),
            epsilon_hat: libm::fabs(p - baseline),
            baseline,
            abort_rate: aborts as f64 / t,
        }
    }

    /// `|p_hat − p| ≤ k·ci95`, with a floor of one trial's worth of
    /// probability so that degenerate estimates can still be compared.
    pub fn within(&self, p: f64, k: f64) -> bool {
        libm::fabs(self.p_hat - p) <= k * self.ci95 + 1.0 / self.trials as f64
    }
}

/// Bob's guess rule after measuring: the candidate whose alignment gives the
/// largest agreement with the z correlations of his own layer alone.
pub fn correlation_guess(view: &GuessView<'_>, own: &[MeasOutcome]) -> u32 {
    let mut best = (i64::MIN, 0);
    for v in 0..view.scheme.m() {
        let score: i64 = (0..view.scheme.n())
            .map(|k| {
                let j = view.scheme.position(v, k);
                let expect = zcorr(BellLabel::from_singlet_pauli(view.own_layer[j]));
                i64::from((view.revealed[k] * own[j] * expect).value())
            })
            .sum();
        if score > best.0 {
            best = (score, v);
        }
    }
    best.1
}

struct Play {
    strategy: Strategy,
}

impl Behavior for Play {
    fn injects_noise(&self, party: usize) -> bool {
        !matches!(
            (self.strategy, party),
            (Strategy::BobNoiseDial, 1) | (Strategy::AliceNoiseDial, 0)
        )
    }

    fn early_measure(&self, _: usize) -> bool {
        matches!(self.strategy, Strategy::BobEarlyMeasure | Strategy::BobNoiseDial)
    }

    fn guess(&mut self, view: &GuessView<'_>, rng: &mut SimRng) -> u32 {
        match self.strategy {
            Strategy::BobEarlyMeasure | Strategy::BobNoiseDial => {
                correlation_guess(view, view.early_outcomes.expect("measured early"))
            }
            Strategy::BobRandomGuess => rng.random_range(0..view.scheme.m()),
            Strategy::BobRevealParity => {
                (view.revealed.iter().filter(|&&r| r == MeasOutcome::Plus).count() % 2) as u32
            }
            _ => view.input_guess,
        }
    }

    fn unveil(&mut self, view: &CommitView<'_>, _: &mut SimRng) -> Vec<PauliOp> {
        let target = (view.commit + 1) % view.scheme.m();
        match self.strategy {
            Strategy::AliceFlipAttempt(FlipSearch::SignAdapt) => sign_adapt(view, target),
            Strategy::AliceFlipAttempt(FlipSearch::ExhaustiveSearch) => {
                exhaustive_unveil(view, target).unwrap_or_else(|| view.layer.to_vec())
            }
            _ => view.layer.to_vec(),
        }
    }
}

/// Unveil list that makes the alignment for `target` consistent with the
/// committer's own outcomes, whatever the receiver's layer.
pub fn sign_adapt(view: &CommitView<'_>, target: u32) -> Vec<PauliOp> {
    let mut out = view.layer.to_vec();
    for k in 0..view.scheme.n() {
        let j = view.scheme.position(target, k);
        if view.revealed[k] * view.outcomes[j] == MeasOutcome::Minus {
            out[j] = out[j].compose(PauliOp::X);
        }
    }
    out
}

/// First list in `4^n` under which Bob's rule would return `target`.
///
/// The committer does not know Bob's layer, but the match outcome does not
/// depend on it: evaluating against an identity layer, with the outcomes
/// Bob would then hold, gives the same decision as the real run.
pub fn exhaustive_unveil(view: &CommitView<'_>, target: u32) -> Option<Vec<PauliOp>> {
    let n = view.scheme.n();
    if n > MAX_EXHAUSTIVE_N {
        return None;
    }
    let bob: Vec<MeasOutcome> = (0..n)
        .map(|j| view.outcomes[j] * zcorr(BellLabel::from_singlet_pauli(view.layer[j])))
        .collect();
    let identity = [alloc::vec![PauliOp::I; n]];
    let mut list = alloc::vec![PauliOp::I; n];
    for code in 0..1u64 << (2 * n) {
        for (j, p) in list.iter_mut().enumerate() {
            *p = PauliOp::from_code(((code >> (2 * j)) & 3) as u8);
        }
        let arr = reconstruct_arrangement(&list, &identity).ok()?;
        let rep = match_commit(view.revealed, &bob, &arr, &view.scheme, view.max_mismatch).ok()?;
        if rep.recovered == Some(target) {
            return Some(list);
        }
    }
    None
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(arg(alloc::format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    Ok(())
}

/// Fraction of sessions in which a Bob strategy's guess equals the commit.
pub fn estimate_bob_guess(strategy: Strategy, cfg: &SessionConfig, trials: usize) -> Result<BiasReport> {
    if strategy.role() != Role::Bob {
        return Err(arg(alloc::format!("{strategy} is not a Bob strategy")));
    }
    check_trials(trials)?;
    let mut play = Play { strategy };
    let mut hits = 0;
    let mut aborts = 0;
    let mut guessed = 0;
    for i in 0..trials as u64 {
        let (commit, guess) = batch_inputs(cfg, i, InputSource::Uniform, InputSource::Uniform);
        let rec = run_session_with(cfg, i, commit, guess, &mut play)?;
        aborts += usize::from(rec.abort.is_some());
        if rec.receivers.first().is_some_and(|b| !b.revealed.is_empty()) {
            guessed += 1;
            hits += usize::from(rec.receivers[0].guess == commit);
        }
    }
    if guessed == 0 {
        return Err(Error::InvalidState("no session reached the guessing step".into()));
    }
    let mut rep = BiasReport::new(strategy, hits, aborts, guessed);
    rep.abort_rate = aborts as f64 / trials as f64;
    Ok(rep)
}

/// Fraction of sessions in which Bob recovers the opposite of Alice's
/// commit under an Alice strategy. Aborts are reported separately.
pub fn estimate_alice_flip(strategy: Strategy, cfg: &SessionConfig, trials: usize) -> Result<BiasReport> {
    if strategy.role() != Role::Alice {
        return Err(arg(alloc::format!("{strategy} is not an Alice strategy")));
    }
    if strategy == Strategy::AliceFlipAttempt(FlipSearch::ExhaustiveSearch) && cfg.retained > MAX_EXHAUSTIVE_N {
        return Err(arg(alloc::format!("exhaustive search needs n <= {MAX_EXHAUSTIVE_N}")));
    }
    check_trials(trials)?;
    let mut play = Play { strategy };
    let mut flips = 0;
    let mut aborts = 0;
    for i in 0..trials as u64 {
        let (commit, guess) = batch_inputs(cfg, i, InputSource::Uniform, InputSource::Uniform);
        let rec = run_session_with(cfg, i, commit, guess, &mut play)?;
        aborts += usize::from(rec.abort.is_some());
        if rec.recovered().first().copied().flatten() == Some(1 - commit) {
            flips += 1;
        }
    }
    Ok(BiasReport::new(strategy, flips, aborts, trials))
}

/// A noise-dial attack: the party skips its own injected noise and plays
/// its best strategy; `cfg` should be noisy.
pub fn estimate_noise_dial(role: Role, cfg: &SessionConfig, trials: usize) -> Result<BiasReport> {
    match role {
        Role::Bob => estimate_bob_guess(Strategy::BobNoiseDial, cfg, trials),
        Role::Alice => estimate_alice_flip(Strategy::AliceNoiseDial, cfg, trials),
    }
}

/// Exact flip-success and abort probabilities of the optimal Unveil-only
/// attack at block size `n`, noiseless, by enumerating Alice's outcomes and
/// all `4^n` lists. Layers are taken as identity, which loses nothing: the
/// decision depends on them only through the X parts, which Alice absorbs.
pub fn alice_flip_exact(n: usize) -> Result<(f64, f64)> {
    if n == 0 || n > MAX_EXHAUSTIVE_N {
        return Err(arg(alloc::format!("n must be in 1..={MAX_EXHAUSTIVE_N}")));
    }
    let scheme = PermutationScheme::binary(n)?;
    let layer = alloc::vec![PauliOp::I; n];
    let mut flips = 0u64;
    let mut aborts = 0u64;
    for commit in 0..2u32 {
        for bits in 0..1u32 << n {
            let outcomes: Vec<MeasOutcome> = (0..n).map(|j| MeasOutcome::from_bool(bits >> j & 1 == 1)).collect();
            let revealed = crate::encoding::encode_reveal(&outcomes, commit, &scheme)?;
            let view = CommitView {
                receiver: 1,
                commit,
                outcomes: &outcomes,
                layer: &layer,
                revealed: &revealed,
                scheme,
                max_mismatch: 0.0,
            };
            match exhaustive_unveil(&view, 1 - commit) {
                Some(_) => flips += 1,
                None => {
                    // falls back to honest disclosure
                    let bob: Vec<MeasOutcome> = outcomes.iter().map(|&a| a * MeasOutcome::Minus).collect();
                    let arr = reconstruct_arrangement(&layer, core::slice::from_ref(&layer))?;
                    let rep = match_commit(&revealed, &bob, &arr, &scheme, 0.0)?;
                    aborts += u64::from(rep.recovered.is_none());
                }
            }
        }
    }
    let total = (2u64 << n) as f64;
    Ok((flips as f64 / total, aborts as f64 / total))
}

/// Unnormalized state of B after A is found with `a` in z, averaged over
/// the committer's Pauli layer drawn with `weights`.
fn conditional_b(a: MeasOutcome, weights: &PauliWeights) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::zeros(2, 2);
    let ia = usize::from(a == MeasOutcome::Minus);
    for p in PauliOp::ALL {
        let st = crate::qsim::apply_pauli(&PairState::singlet(), Side::A, p);
        let rho = st.rho();
        for b1 in 0..2 {
            for b2 in 0..2 {
                out[(b1, b2)] += rho[(2 * ia + b1, 2 * ia + b2)] * c(weights.weight(p), 0.0);
            }
        }
    }
    out
}

fn trace_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().map(|&e| libm::fabs(e)).sum()
}

/// Exact trace distance between Bob's pre-unveil views for commit 0 and
/// commit 1: the classical reveal together with his block, averaged over
/// the committer's layer. Zero means no strategy, however powerful, gains
/// anything over a coin flip.
pub fn bob_view_distance(n: usize, weights: &PauliWeights) -> Result<f64> {
    if n == 0 || n > 6 {
        return Err(arg("exact view comparison supports 1 <= n <= 6"));
    }
    weights.validate()?;
    let scheme = PermutationScheme::binary(n)?;
    let tau = [conditional_b(MeasOutcome::Plus, weights), conditional_b(MeasOutcome::Minus, weights)];
    let block = |outcomes: &[MeasOutcome]| {
        let mut m = DMatrix::<C64>::from_element(1, 1, c(1.0, 0.0));
        for &a in outcomes {
            m = m.kronecker(&tau[usize::from(a == MeasOutcome::Minus)]);
        }
        m
    };
    let mut total = 0.0;
    for bits in 0..1u32 << n {
        let revealed: Vec<MeasOutcome> = (0..n).map(|j| MeasOutcome::from_bool(bits >> j & 1 == 1)).collect();
        let s0 = block(&decode_reveal(&revealed, 0, &scheme)?);
        let s1 = block(&decode_reveal(&revealed, 1, &scheme)?);
        total += trace_norm(&(s0 - s1));
    }
    Ok(total / 2.0)
}
