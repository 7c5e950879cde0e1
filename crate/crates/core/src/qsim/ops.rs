use rand::Rng;

use super::state::{basis_index, eigenvalues, is_hermitian, kron, lift, EXACT_TOL};
use super::{c, Axis, BellLabel, Mat2, Mat4, MeasOutcome, PairState, PauliOp, Side};
use crate::error::{arg, Error, Result};

pub fn bell_state(label: BellLabel) -> PairState {
    PairState::bell(label)
}

/// `(P⊗I) ρ (P⊗I)†` or `(I⊗P) ρ (I⊗P)†`.
pub fn apply_pauli(state: &PairState, side: Side, p: PauliOp) -> PairState {
    if p == PauliOp::I {
        return state.clone();
    }
    state.conjugate(&lift(side, &p.matrix()))
}

fn projector(axis: &Axis, outcome: MeasOutcome) -> Mat2 {
    let s = f64::from(outcome.value());
    (PauliOp::I.matrix() + axis.sigma() * c(s, 0.0)) * c(0.5, 0.0)
}

/// Projective spin measurement of one qubit along `axis`.
pub fn measure_axis<R: Rng + ?Sized>(
    state: &PairState,
    side: Side,
    axis: &Axis,
    rng: &mut R,
) -> Result<(MeasOutcome, PairState)> {
    let up = lift(side, &projector(axis, MeasOutcome::Plus));
    let down = lift(side, &projector(axis, MeasOutcome::Minus));
    let rho = state.rho();
    let p_up = (up * rho).trace().re.clamp(0.0, 1.0);
    let p_down = (down * rho).trace().re.clamp(0.0, 1.0);
    if p_up < EXACT_TOL && p_down < EXACT_TOL {
        return Err(Error::DegenerateMeasurement);
    }
    let total = p_up + p_down;
    let (outcome, proj, p) = if rng.random::<f64>() * total < p_up {
        (MeasOutcome::Plus, up, p_up)
    } else {
        (MeasOutcome::Minus, down, p_down)
    };
    let collapsed = proj * rho * proj * c(1.0 / p, 0.0);
    Ok((outcome, PairState::from_channel_output(collapsed)))
}

/// Joint z-basis measurement of both qubits.
pub fn measure_z_joint<R: Rng + ?Sized>(
    state: &PairState,
    rng: &mut R,
) -> Result<(MeasOutcome, MeasOutcome, PairState)> {
    use MeasOutcome::{Minus, Plus};
    let rho = state.rho();
    let probs: [f64; 4] = core::array::from_fn(|i| rho[(i, i)].re.max(0.0));
    let total: f64 = probs.iter().sum();
    if total < EXACT_TOL {
        return Err(Error::DegenerateMeasurement);
    }
    let mut u = rng.random::<f64>() * total;
    let mut idx = 3;
    for (i, p) in probs.iter().enumerate() {
        if u < *p {
            idx = i;
            break;
        }
        u -= p;
    }
    let pairs = [(Plus, Plus), (Plus, Minus), (Minus, Plus), (Minus, Minus)];
    let (a, b) = pairs[idx];
    debug_assert_eq!(basis_index(a, b), idx);
    Ok((a, b, PairState::product_z(a, b)))
}

/// Single-qubit depolarizing channel on one side:
/// `ρ → (1−p) ρ + p · (𝐈/2 ⊗ tr_side ρ)`.
pub fn depolarize(state: &PairState, side: Side, p: f64) -> Result<PairState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(arg(alloc::format!("depolarizing probability {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(state.clone());
    }
    // Pauli twirl form: (1 - 3p/4) ρ + p/4 Σ_{X,Y,Z} P ρ P.
    let rho = state.rho();
    let mut out = rho * c(1.0 - 0.75 * p, 0.0);
    for q in [PauliOp::X, PauliOp::Y, PauliOp::Z] {
        let u = lift(side, &q.matrix());
        out += u * rho * u.adjoint() * c(0.25 * p, 0.0);
    }
    Ok(PairState::from_channel_output(out))
}

/// A pure state that can enter an ensemble by name.
pub trait PureLabel: Copy {
    fn density(self) -> Mat4;
}

impl PureLabel for BellLabel {
    fn density(self) -> Mat4 {
        PairState::bell(self).into_rho()
    }
}

/// The four z-basis product states `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZProduct(pub MeasOutcome, pub MeasOutcome);

impl ZProduct {
    pub const ALL: [ZProduct; 4] = [
        ZProduct(MeasOutcome::Plus, MeasOutcome::Plus),
        ZProduct(MeasOutcome::Plus, MeasOutcome::Minus),
        ZProduct(MeasOutcome::Minus, MeasOutcome::Plus),
        ZProduct(MeasOutcome::Minus, MeasOutcome::Minus),
    ];
}

impl PureLabel for ZProduct {
    fn density(self) -> Mat4 {
        PairState::product_z(self.0, self.1).into_rho()
    }
}

/// Weighted mixture of named pure states.
pub fn ensemble_density<L: PureLabel>(items: &[(L, f64)]) -> Result<Mat4> {
    if items.is_empty() {
        return Err(arg("ensemble is empty"));
    }
    let mut total = 0.0;
    let mut rho = Mat4::zeros();
    for &(label, w) in items {
        if w.is_nan() || w < 0.0 {
            return Err(arg(alloc::format!("negative or NaN weight {w}")));
        }
        total += w;
        rho += label.density() * c(w, 0.0);
    }
    if (total - 1.0).abs() > EXACT_TOL {
        return Err(arg(alloc::format!("weights sum to {total}, not 1")));
    }
    Ok(rho)
}

/// Equal-weight mixture of arbitrary pair states.
pub fn average_state(states: &[PairState]) -> Result<Mat4> {
    if states.is_empty() {
        return Err(arg("no states to average"));
    }
    let w = c(1.0 / states.len() as f64, 0.0);
    Ok(states.iter().fold(Mat4::zeros(), |acc, s| acc + s.rho() * w))
}

/// Partial transpose on the B qubit.
pub fn partial_transpose(rho: &Mat4) -> Mat4 {
    Mat4::from_fn(|r, col| {
        let (i, k) = (r / 2, r % 2);
        let (j, l) = (col / 2, col % 2);
        rho[(2 * i + l, 2 * j + k)]
    })
}

/// Sum of the magnitudes of the negative partial-transpose eigenvalues.
pub fn negativity(state: &PairState) -> f64 {
    eigenvalues(&partial_transpose(state.rho()))
        .iter()
        .filter(|&&l| l < 0.0)
        .map(|l| -l)
        .sum()
}

/// `½ ‖a − b‖₁` for Hermitian `a`, `b`.
pub fn trace_distance(a: &Mat4, b: &Mat4) -> Result<f64> {
    if !is_hermitian(a, EXACT_TOL) || !is_hermitian(b, EXACT_TOL) {
        return Err(arg("trace distance needs Hermitian inputs"));
    }
    let d = a - b;
    Ok(0.5 * eigenvalues(&d).iter().map(|l| l.abs()).sum::<f64>())
}

/// Applies `(pa ⊗ pb)` to the singlet, the matrix-level reference for
/// [`super::pauli_on_singlet_label`].
pub fn paulis_on_singlet(pa: PauliOp, pb: PauliOp) -> PairState {
    PairState::singlet().conjugate(&kron(&pa.matrix(), &pb.matrix()))
}
