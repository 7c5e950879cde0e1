//! Sequence-ensemble encoding of a committed value.
//!
//! A value `v` is carried by the *order* in which the committer reveals its
//! z outcomes: revealed index `k` is aligned with physical position `π_v(k)`.
//! Indices here are 0-based; the binary reversal `i ↦ n+1−i` becomes
//! `k ↦ n−1−k`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::qsim::{pauli_on_singlet_label, zcorr, BellLabel, MeasOutcome, PauliOp};

pub type OutcomeList = Vec<MeasOutcome>;

/// The `m` orderings used to encode a value in `{0..m−1}` over `n` pairs.
///
/// `m = 2`: identity and full reversal. `m > 2`: `π_v` is a cyclic shift by
/// `v·⌊n/m⌋`, which needs `n ≥ m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationScheme {
    m: u32,
    n: usize,
}

impl PermutationScheme {
    pub fn new(m: u32, n: usize) -> Result<Self> {
        if m < 2 {
            return Err(arg("a scheme needs at least two values"));
        }
        if n == 0 {
            return Err(arg("sequence length must be positive"));
        }
        if m > 2 && n < m as usize {
            return Err(arg(alloc::format!("cyclic scheme needs n >= m (n = {n}, m = {m})")));
        }
        Ok(PermutationScheme { m, n })
    }

    pub fn binary(n: usize) -> Result<Self> {
        Self::new(2, n)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn shift(&self) -> usize {
        self.n / self.m as usize
    }

    fn check(&self, v: u32) -> Result<()> {
        if v >= self.m {
            return Err(Error::OutOfRange { value: v, bound: self.m });
        }
        Ok(())
    }

    /// Physical position aligned with revealed index `k` under value `v`.
    ///
    /// `v` must already be in range.
    pub fn position(&self, v: u32, k: usize) -> usize {
        debug_assert!(v < self.m && k < self.n);
        if self.m == 2 {
            if v == 0 {
                k
            } else {
                self.n - 1 - k
            }
        } else {
            (k + v as usize * self.shift()) % self.n
        }
    }

    /// The full index map `k ↦ π_v(k)`.
    pub fn permutation(&self, v: u32) -> Result<Vec<usize>> {
        self.check(v)?;
        Ok((0..self.n).map(|k| self.position(v, k)).collect())
    }

    /// True when two distinct values share an ordering (only `m = 2, n = 1`).
    pub fn is_degenerate(&self) -> bool {
        self.m == 2 && self.n == 1
    }
}

/// Per-position Bell labels reconstructed from every party's Pauli layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrangement {
    pub labels: Vec<BellLabel>,
}

impl Arrangement {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Composes the committer's layer `ua` with the other parties' layers.
pub fn reconstruct_arrangement<L: AsRef<[PauliOp]>>(ua: &[PauliOp], others: &[L]) -> Result<Arrangement> {
    let n = ua.len();
    for layer in others {
        if layer.as_ref().len() != n {
            return Err(Error::LengthMismatch { expected: n, got: layer.as_ref().len() });
        }
    }
    let labels = (0..n)
        .map(|i| {
            let rest = others.iter().fold(PauliOp::I, |acc, l| acc.compose(l.as_ref()[i]));
            pauli_on_singlet_label(ua[i], rest)
        })
        .collect();
    Ok(Arrangement { labels })
}

/// Reorders outcomes so that revealed index `k` carries `outcomes[π_v(k)]`.
pub fn encode_reveal(outcomes: &[MeasOutcome], v: u32, scheme: &PermutationScheme) -> Result<OutcomeList> {
    if outcomes.len() != scheme.n() {
        return Err(Error::LengthMismatch { expected: scheme.n(), got: outcomes.len() });
    }
    let perm = scheme.permutation(v)?;
    Ok(perm.into_iter().map(|j| outcomes[j]).collect())
}

/// Inverse of [`encode_reveal`].
pub fn decode_reveal(revealed: &[MeasOutcome], v: u32, scheme: &PermutationScheme) -> Result<OutcomeList> {
    if revealed.len() != scheme.n() {
        return Err(Error::LengthMismatch { expected: scheme.n(), got: revealed.len() });
    }
    let perm = scheme.permutation(v)?;
    let mut out = alloc::vec![MeasOutcome::Plus; scheme.n()];
    for (k, j) in perm.into_iter().enumerate() {
        out[j] = revealed[k];
    }
    Ok(out)
}

/// Outcome of matching revealed data against one's own data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    /// The unique candidate under threshold, or `None` (abort).
    pub recovered: Option<u32>,
    /// Mismatch fraction for every candidate value.
    pub mismatch: Vec<f64>,
    /// More than one candidate was under threshold.
    pub ambiguous: bool,
}

impl MatchReport {
    pub fn mismatch_for(&self, v: u32) -> f64 {
        self.mismatch[v as usize]
    }
}

pub fn within_threshold(mismatches: usize, n: usize, max_mismatch: f64) -> bool {
    mismatches as f64 <= max_mismatch * n as f64 + 1e-9
}

/// Counts, for every candidate `v`, the positions where the revealed outcome
/// times one's own outcome at `π_v(k)` disagrees with the arrangement's
/// z correlation there.
pub fn match_commit(
    revealed: &[MeasOutcome],
    own: &[MeasOutcome],
    arr: &Arrangement,
    scheme: &PermutationScheme,
    max_mismatch: f64,
) -> Result<MatchReport> {
    let n = scheme.n();
    for len in [revealed.len(), own.len(), arr.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, got: len });
        }
    }
    if !(0.0..=1.0).contains(&max_mismatch) {
        return Err(arg("max_mismatch must be a fraction"));
    }
    let mut mismatch = Vec::with_capacity(scheme.m() as usize);
    let mut accepted = Vec::new();
    for v in 0..scheme.m() {
        let bad = (0..n)
            .filter(|&k| {
                let j = scheme.position(v, k);
                revealed[k] * own[j] != zcorr(arr.labels[j])
            })
            .count();
        if within_threshold(bad, n, max_mismatch) {
            accepted.push(v);
        }
        mismatch.push(bad as f64 / n as f64);
    }
    let ambiguous = accepted.len() > 1;
    let recovered = if accepted.len() == 1 { Some(accepted[0]) } else { None };
    Ok(MatchReport { recovered, mismatch, ambiguous })
}

/// Acceptance threshold for noisy operation at accepted noise level `p_acc`:
/// `p_acc/2 + 3·sqrt(p_acc/(2n))`.
pub fn noisy_threshold(p_acc: f64, n: usize) -> f64 {
    (p_acc / 2.0 + 3.0 * libm::sqrt(p_acc / (2.0 * n as f64))).min(1.0)
}
