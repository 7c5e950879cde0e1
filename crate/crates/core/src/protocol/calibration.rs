//! Ensemble preparation, noise calibration and ensemble tomography.

use alloc::vec::Vec;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{Calibration, PauliWeights};
use crate::error::{arg, Error, Result};
use crate::qsim::{
    apply_pauli, depolarize, kron, quarter_identity, trace_distance, Axis, Mat2, Mat4, PairState,
    PauliOp, Side,
};

/// Draws one Pauli per position from the machine's weights.
pub fn draw_paulis<R: Rng + ?Sized>(count: usize, weights: &PauliWeights, rng: &mut R) -> Vec<PauliOp> {
    (0..count)
        .map(|_| {
            let mut u: f64 = rng.random();
            for p in PauliOp::ALL {
                let w = weights.weight(p);
                if u < w {
                    return p;
                }
                u -= w;
            }
            PauliOp::Z
        })
        .collect()
}

/// `Σ_P w_P (P on side) ρ (P on side)†`: the pair as seen by anyone who does
/// not know which Pauli was drawn.
pub fn pauli_twirl(state: &PairState, side: Side, weights: &PauliWeights) -> PairState {
    let mut out = Mat4::zeros();
    for p in PauliOp::ALL {
        let w = weights.weight(p);
        if w > 0.0 {
            out += apply_pauli(state, side, p).rho() * Complex::new(w, 0.0);
        }
    }
    PairState::new(out).expect("a convex mixture of states is a state")
}

/// Calibration noise needed to bring `ensemble` within `cal.target_tol` of
/// `¼𝐈`, depolarizing `side` in steps of `cal.step`.
pub fn noise_suppress<R: Rng + ?Sized>(
    ensemble: &PairState,
    side: Side,
    cal: &Calibration,
    rng: &mut R,
) -> Result<f64> {
    let target = quarter_identity();
    let mut q = 0.0f64;
    for _ in 0..=cal.max_iter {
        let mixed = depolarize(ensemble, side, q.min(1.0))?;
        let distance = match cal.shots {
            Some(shots) => tomography(core::slice::from_ref(&mixed), shots, rng)?.distance_to_mixed,
            None => trace_distance(mixed.rho(), &target)?,
        };
        if distance <= cal.target_tol {
            return Ok(q.min(1.0));
        }
        if q >= 1.0 {
            break;
        }
        q += cal.step;
    }
    Err(Error::InvalidState("noise calibration did not converge".into()))
}

/// Linear-inversion estimate of an ensemble density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyReport {
    #[serde(skip)]
    pub estimate: Mat4,
    /// Real parts of the estimate, row-major.
    pub estimate_re: Vec<f64>,
    /// Imaginary parts of the estimate, row-major.
    pub estimate_im: Vec<f64>,
    pub distance_to_mixed: f64,
    pub shots_per_setting: usize,
}

impl TomographyReport {
    fn new(estimate: Mat4, shots: usize) -> Result<Self> {
        let distance_to_mixed = trace_distance(&estimate, &quarter_identity())?;
        Ok(TomographyReport {
            estimate_re: estimate.transpose().iter().map(|z| z.re).collect(),
            estimate_im: estimate.transpose().iter().map(|z| z.im).collect(),
            estimate,
            distance_to_mixed,
            shots_per_setting: shots,
        })
    }

    /// Exact counterpart for simulator-privileged access to the states.
    pub fn exact(states: &[PairState]) -> Result<Self> {
        TomographyReport::new(crate::qsim::average_state(states)?, 0)
    }
}

const SETTINGS: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

fn projector(axis: &Axis, sign: f64) -> Mat2 {
    (PauliOp::I.matrix() + axis.sigma() * Complex::new(sign, 0.0)) * Complex::new(0.5, 0.0)
}

/// Estimates the average state of `states` from `shots` joint measurements
/// in each of the nine local Pauli settings, cycling through the sample.
pub fn tomography<R: Rng + ?Sized>(states: &[PairState], shots: usize, rng: &mut R) -> Result<TomographyReport> {
    if states.is_empty() {
        return Err(arg("tomography needs a nonempty sample"));
    }
    if shots == 0 {
        return Err(arg("tomography needs at least one shot per setting"));
    }
    let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    // corr[a][b] = <σa⊗σb>, marg_a[a] / marg_b[b] accumulated over settings
    let mut corr = [[0.0f64; 3]; 3];
    let mut marg_a = [0.0f64; 3];
    let mut marg_b = [0.0f64; 3];
    for (ia, ax_a) in SETTINGS.iter().enumerate() {
        for (ib, ax_b) in SETTINGS.iter().enumerate() {
            let joint: Vec<[f64; 4]> = states
                .iter()
                .map(|s| {
                    signs.map(|(sa, sb)| {
                        let proj = kron(&projector(ax_a, sa), &projector(ax_b, sb));
                        (proj * s.rho()).trace().re.max(0.0)
                    })
                })
                .collect();
            let (mut sum_ab, mut sum_a, mut sum_b) = (0.0, 0.0, 0.0);
            for shot in 0..shots {
                let probs = &joint[shot % states.len()];
                let total: f64 = probs.iter().sum();
                let mut u = rng.random::<f64>() * total;
                let mut pick = 3;
                for (k, p) in probs.iter().enumerate() {
                    if u < *p {
                        pick = k;
                        break;
                    }
                    u -= p;
                }
                let (sa, sb) = signs[pick];
                sum_ab += sa * sb;
                sum_a += sa;
                sum_b += sb;
            }
            let n = shots as f64;
            corr[ia][ib] = sum_ab / n;
            marg_a[ia] += sum_a / (3.0 * n);
            marg_b[ib] += sum_b / (3.0 * n);
        }
    }
    let paulis = [PauliOp::X.matrix(), PauliOp::Y.matrix(), PauliOp::Z.matrix()];
    let id = PauliOp::I.matrix();
    let mut est = kron(&id, &id);
    for a in 0..3 {
        est += kron(&paulis[a], &id) * Complex::new(marg_a[a], 0.0);
        est += kron(&id, &paulis[a]) * Complex::new(marg_b[a], 0.0);
        for b in 0..3 {
            est += kron(&paulis[a], &paulis[b]) * Complex::new(corr[a][b], 0.0);
        }
    }
    let est = est * Complex::new(0.25, 0.0);
    // Pauli expansion with real coefficients is Hermitian by construction
    let est = (est + est.adjoint()) * Complex::new(0.5, 0.0);
    TomographyReport::new(est, shots)
}
