//! Storage of the physical pairs of a run.
//!
//! [`MatrixBackend`] keeps every pair as an exact density matrix.
//! [`LabelBackend`] tracks the noiseless fragment symbolically: a pair is
//! either a Bell state (a one-sided Pauli on the singlet) or a product of two
//! Bloch vectors after its first measurement. Depolarizing noise on a Bell
//! pair is unravelled into a randomly drawn Pauli, which reproduces the
//! channel's statistics exactly.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::Result;
use crate::qsim::{
    apply_pauli, depolarize, kron, measure_axis, Axis, BellLabel, MeasOutcome, PairState, PauliOp,
    Side,
};

/// Operations a protocol engine performs on its pairs.
pub trait PairBackend {
    /// `n` fresh singlets.
    fn singlets(n: usize) -> Self
    where
        Self: Sized;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn apply_pauli(&mut self, pos: usize, side: Side, p: PauliOp);
    fn depolarize<R: Rng + ?Sized>(&mut self, pos: usize, side: Side, p: f64, rng: &mut R) -> Result<()>;
    fn measure<R: Rng + ?Sized>(&mut self, pos: usize, side: Side, axis: &Axis, rng: &mut R) -> Result<MeasOutcome>;
    /// Replaces a pair by the z-product state `|a⟩|b⟩`.
    fn set_product(&mut self, pos: usize, a: MeasOutcome, b: MeasOutcome);
    /// Density matrix of one pair (exact for the matrix backend; for the
    /// label backend, the state of the current trajectory).
    fn state(&self, pos: usize) -> PairState;
}

/// Which backend a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Matrix,
    Label,
}

#[derive(Debug, Clone)]
pub struct MatrixBackend {
    pairs: Vec<PairState>,
}

impl PairBackend for MatrixBackend {
    fn singlets(n: usize) -> Self {
        MatrixBackend { pairs: alloc::vec![PairState::singlet(); n] }
    }

    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn apply_pauli(&mut self, pos: usize, side: Side, p: PauliOp) {
        self.pairs[pos] = apply_pauli(&self.pairs[pos], side, p);
    }

    fn depolarize<R: Rng + ?Sized>(&mut self, pos: usize, side: Side, p: f64, _rng: &mut R) -> Result<()> {
        self.pairs[pos] = depolarize(&self.pairs[pos], side, p)?;
        Ok(())
    }

    fn measure<R: Rng + ?Sized>(&mut self, pos: usize, side: Side, axis: &Axis, rng: &mut R) -> Result<MeasOutcome> {
        let (o, post) = measure_axis(&self.pairs[pos], side, axis, rng)?;
        self.pairs[pos] = post;
        Ok(o)
    }

    fn set_product(&mut self, pos: usize, a: MeasOutcome, b: MeasOutcome) {
        self.pairs[pos] = PairState::product_z(a, b);
    }

    fn state(&self, pos: usize) -> PairState {
        self.pairs[pos].clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LabelPair {
    /// `(p ⊗ I)|ψ−⟩`
    Bell(PauliOp),
    /// Product of (possibly mixed) single-qubit Bloch vectors.
    Product { a: [f64; 3], b: [f64; 3] },
}

#[derive(Debug, Clone)]
pub struct LabelBackend {
    pairs: Vec<LabelPair>,
}

fn reflect(p: PauliOp, v: [f64; 3]) -> [f64; 3] {
    let s = p.bloch_signs();
    [s[0] * v[0], s[1] * v[1], s[2] * v[2]]
}

fn scaled(k: f64, v: [f64; 3]) -> [f64; 3] {
    [k * v[0], k * v[1], k * v[2]]
}

fn bloch_matrix(v: [f64; 3]) -> crate::qsim::Mat2 {
    use nalgebra::Matrix2;
    use num_complex::Complex;
    let h = |re: f64, im: f64| Complex::new(0.5 * re, 0.5 * im);
    Matrix2::new(h(1.0 + v[2], 0.0), h(v[0], -v[1]), h(v[0], v[1]), h(1.0 - v[2], 0.0))
}

impl LabelBackend {
    /// The Bell label of a pair, if it is still entangled.
    pub fn label(&self, pos: usize) -> Option<BellLabel> {
        match self.pairs[pos] {
            LabelPair::Bell(p) => Some(BellLabel::from_singlet_pauli(p)),
            LabelPair::Product { .. } => None,
        }
    }
}

impl PairBackend for LabelBackend {
    fn singlets(n: usize) -> Self {
        LabelBackend { pairs: alloc::vec![LabelPair::Bell(PauliOp::I); n] }
    }

    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn apply_pauli(&mut self, pos: usize, side: Side, p: PauliOp) {
        let pair = &mut self.pairs[pos];
        *pair = match (*pair, side) {
            // a B-side Pauli on a singlet acts as the same Pauli on A
            (LabelPair::Bell(q), _) => LabelPair::Bell(p.compose(q)),
            (LabelPair::Product { a, b }, Side::A) => LabelPair::Product { a: reflect(p, a), b },
            (LabelPair::Product { a, b }, Side::B) => LabelPair::Product { a, b: reflect(p, b) },
        };
    }

    fn depolarize<R: Rng + ?Sized>(&mut self, pos: usize, side: Side, p: f64, rng: &mut R) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(crate::error::arg("depolarizing probability outside [0, 1]"));
        }
        if p == 0.0 {
            return Ok(());
        }
        match self.pairs[pos] {
            LabelPair::Bell(_) => {
                let u: f64 = rng.random();
                if u < 0.75 * p {
                    let err = [PauliOp::X, PauliOp::Y, PauliOp::Z][rng.random_range(0..3)];
                    self.apply_pauli(pos, side, err);
                }
            }
            LabelPair::Product { a, b } => {
                self.pairs[pos] = match side {
                    Side::A => LabelPair::Product { a: scaled(1.0 - p, a), b },
                    Side::B => LabelPair::Product { a, b: scaled(1.0 - p, b) },
                };
            }
        }
        Ok(())
    }

    fn measure<R: Rng + ?Sized>(&mut self, pos: usize, side: Side, axis: &Axis, rng: &mut R) -> Result<MeasOutcome> {
        let n = axis.components();
        let (outcome, next) = match self.pairs[pos] {
            LabelPair::Bell(p) => {
                let o = MeasOutcome::from_bool(rng.random::<bool>());
                let s = f64::from(o.value());
                // partner collapses to −s·R_p n
                let here = scaled(s, n);
                let there = scaled(-s, reflect(p, n));
                let next = match side {
                    Side::A => LabelPair::Product { a: here, b: there },
                    Side::B => LabelPair::Product { a: there, b: here },
                };
                (o, next)
            }
            LabelPair::Product { a, b } => {
                let r = if side == Side::A { a } else { b };
                let p_up = 0.5 * (1.0 + axis.dot(&r));
                let o = MeasOutcome::from_bool(rng.random::<f64>() < p_up);
                let here = scaled(f64::from(o.value()), n);
                let next = match side {
                    Side::A => LabelPair::Product { a: here, b },
                    Side::B => LabelPair::Product { a, b: here },
                };
                (o, next)
            }
        };
        self.pairs[pos] = next;
        Ok(outcome)
    }

    fn set_product(&mut self, pos: usize, a: MeasOutcome, b: MeasOutcome) {
        self.pairs[pos] = LabelPair::Product {
            a: [0.0, 0.0, f64::from(a.value())],
            b: [0.0, 0.0, f64::from(b.value())],
        };
    }

    fn state(&self, pos: usize) -> PairState {
        match self.pairs[pos] {
            LabelPair::Bell(p) => PairState::bell(BellLabel::from_singlet_pauli(p)),
            LabelPair::Product { a, b } => {
                PairState::new(kron(&bloch_matrix(a), &bloch_matrix(b))).expect("product of Bloch states is a valid state")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    /// Joint outcome frequencies of both backends for the same protocol of
    /// operations must agree statistically.
    fn freqs<B: PairBackend>(ops: impl Fn(&mut B, &mut crate::rng::SimRng) -> (MeasOutcome, MeasOutcome), seed: u64) -> [f64; 4] {
        let mut rng = stream(seed, 0, 0);
        let mut counts = [0usize; 4];
        let trials = 20_000;
        for _ in 0..trials {
            let mut b = B::singlets(1);
            let (x, y) = ops(&mut b, &mut rng);
            let idx = 2 * usize::from(x == MeasOutcome::Minus) + usize::from(y == MeasOutcome::Minus);
            counts[idx] += 1;
        }
        counts.map(|c| c as f64 / trials as f64)
    }

    fn scenario<B: PairBackend>(b: &mut B, rng: &mut crate::rng::SimRng) -> (MeasOutcome, MeasOutcome) {
        let ax = Axis::normalized([0.3, -0.5, 0.8]).unwrap();
        let bx = Axis::normalized([-0.2, 0.9, 0.1]).unwrap();
        b.apply_pauli(0, Side::A, PauliOp::Y);
        b.depolarize(0, Side::B, 0.3, rng).unwrap();
        b.apply_pauli(0, Side::B, PauliOp::X);
        let x = b.measure(0, Side::A, &ax, rng).unwrap();
        b.depolarize(0, Side::B, 0.2, rng).unwrap();
        let y = b.measure(0, Side::B, &bx, rng).unwrap();
        (x, y)
    }

    /// Exact joint distribution of [`scenario`] from the density matrix.
    fn exact() -> [f64; 4] {
        use crate::qsim::{lift, Mat4};
        use num_complex::Complex;
        let ax = Axis::normalized([0.3, -0.5, 0.8]).unwrap();
        let bx = Axis::normalized([-0.2, 0.9, 0.1]).unwrap();
        let s = PairState::singlet();
        let s = apply_pauli(&s, Side::A, PauliOp::Y);
        let s = depolarize(&s, Side::B, 0.3).unwrap();
        let s = apply_pauli(&s, Side::B, PauliOp::X);
        // depolarizing B between the two measurements commutes with the A projector
        let s = depolarize(&s, Side::B, 0.2).unwrap();
        let proj = |a: &Axis, o: f64| (PauliOp::I.matrix() + a.sigma() * Complex::new(o, 0.0)) * Complex::new(0.5, 0.0);
        let mut out = [0.0; 4];
        for (i, (oa, ob)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].into_iter().enumerate() {
            let pa: Mat4 = lift(Side::A, &proj(&ax, oa));
            let pb: Mat4 = lift(Side::B, &proj(&bx, ob));
            out[i] = (pa * pb * s.rho()).trace().re;
        }
        out
    }

    #[test]
    fn backends_agree_with_exact_distribution() {
        let e = exact();
        let m = freqs::<MatrixBackend>(scenario, 1);
        let l = freqs::<LabelBackend>(scenario, 2);
        for i in 0..4 {
            // 20k samples: sd <= 0.0036
            assert!((m[i] - e[i]).abs() < 0.015, "matrix {m:?} vs {e:?}");
            assert!((l[i] - e[i]).abs() < 0.015, "label {l:?} vs {e:?}");
        }
    }

    #[test]
    fn label_states_follow_matrix_states_without_noise() {
        let mut m = MatrixBackend::singlets(1);
        let mut l = LabelBackend::singlets(1);
        for (side, p) in [(Side::A, PauliOp::X), (Side::B, PauliOp::Y), (Side::B, PauliOp::Z), (Side::A, PauliOp::Y)] {
            m.apply_pauli(0, side, p);
            l.apply_pauli(0, side, p);
            assert!((m.state(0).bell_fidelity(l.label(0).unwrap()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singlet_same_axis_always_opposite() {
        let mut rng = stream(4, 0, 0);
        for _ in 0..500 {
            let axis = Axis::random(&mut rng);
            let mut l = LabelBackend::singlets(1);
            let mut m = MatrixBackend::singlets(1);
            let a = l.measure(0, Side::A, &axis, &mut rng).unwrap();
            let b = l.measure(0, Side::B, &axis, &mut rng).unwrap();
            assert_ne!(a, b);
            let a = m.measure(0, Side::B, &axis, &mut rng).unwrap();
            let b = m.measure(0, Side::A, &axis, &mut rng).unwrap();
            assert_ne!(a, b);
        }
    }
}
