use core::ops::Mul;

use nalgebra::Matrix4;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{c, BellLabel, Mat2, Mat4, PauliOp, Side, C64};
use crate::error::{Error, Result};

/// Tolerance for exact algebraic identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for eigenvalue-derived quantities.
pub const EIGEN_TOL: f64 = 1e-9;
/// Smallest eigenvalue tolerated in a valid density matrix.
pub const PSD_TOL: f64 = 1e-10;

/// Spin-up (`+1`) or spin-down (`-1`) along the measured axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasOutcome {
    Plus,
    Minus,
}

impl MeasOutcome {
    pub const fn value(self) -> i8 {
        match self {
            MeasOutcome::Plus => 1,
            MeasOutcome::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            1 => Ok(MeasOutcome::Plus),
            -1 => Ok(MeasOutcome::Minus),
            _ => Err(crate::error::arg(alloc::format!("outcome must be +1 or -1, got {v}"))),
        }
    }

    pub const fn flip(self) -> Self {
        match self {
            MeasOutcome::Plus => MeasOutcome::Minus,
            MeasOutcome::Minus => MeasOutcome::Plus,
        }
    }

    pub const fn from_bool(up: bool) -> Self {
        if up {
            MeasOutcome::Plus
        } else {
            MeasOutcome::Minus
        }
    }
}

impl Mul for MeasOutcome {
    type Output = MeasOutcome;

    fn mul(self, rhs: MeasOutcome) -> MeasOutcome {
        MeasOutcome::from_bool(self == rhs)
    }
}

impl Serialize for MeasOutcome {
    fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for MeasOutcome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        MeasOutcome::from_value(v).map_err(serde::de::Error::custom)
    }
}

/// Unit Bloch direction of a spin measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    n: [f64; 3],
}

impl Axis {
    pub const Z: Axis = Axis { n: [0.0, 0.0, 1.0] };
    pub const X: Axis = Axis { n: [1.0, 0.0, 0.0] };
    pub const Y: Axis = Axis { n: [0.0, 1.0, 0.0] };

    pub fn new(n: [f64; 3]) -> Result<Self> {
        let norm = libm::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(crate::error::arg(alloc::format!("axis norm {norm} is not 1")));
        }
        Ok(Axis { n })
    }

    /// Normalizes any nonzero vector.
    pub fn normalized(n: [f64; 3]) -> Result<Self> {
        let norm = libm::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        if !norm.is_finite() || norm <= 0.0 {
            return Err(crate::error::arg("axis vector must be nonzero and finite"));
        }
        Ok(Axis { n: [n[0] / norm, n[1] / norm, n[2] / norm] })
    }

    /// Uniformly distributed direction on the sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let z = 2.0 * rng.random::<f64>() - 1.0;
        let phi = 2.0 * core::f64::consts::PI * rng.random::<f64>();
        let r = libm::sqrt((1.0 - z * z).max(0.0));
        Axis { n: [r * libm::cos(phi), r * libm::sin(phi), z] }
    }

    pub fn components(&self) -> [f64; 3] {
        self.n
    }

    pub fn dot(&self, other: &[f64; 3]) -> f64 {
        self.n[0] * other[0] + self.n[1] * other[1] + self.n[2] * other[2]
    }

    /// `n · σ` as a 2×2 matrix.
    pub fn sigma(&self) -> Mat2 {
        let [x, y, z] = self.n;
        nalgebra::Matrix2::new(c(z, 0.0), c(x, -y), c(x, y), c(-z, 0.0))
    }
}

/// Kronecker product of two single-qubit operators.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Matrix4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Lifts a single-qubit operator to the chosen side of a pair.
pub fn lift(side: Side, op: &Mat2) -> Mat4 {
    let id = PauliOp::I.matrix();
    match side {
        Side::A => kron(op, &id),
        Side::B => kron(&id, op),
    }
}

pub fn is_hermitian(m: &Mat4, tol: f64) -> bool {
    (m - m.adjoint()).iter().all(|z| z.norm() <= tol)
}

pub fn eigenvalues(m: &Mat4) -> [f64; 4] {
    let ev = m.symmetric_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    out
}

/// The maximally mixed two-qubit matrix `¼ 𝐈`.
pub fn quarter_identity() -> Mat4 {
    Mat4::identity() * c(0.25, 0.0)
}

/// Density matrix of one two-qubit pair, basis `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    rho: Mat4,
}

impl PairState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: Mat4) -> Result<Self> {
        if !is_hermitian(&rho, EXACT_TOL) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > EXACT_TOL || tr.im.abs() > EXACT_TOL {
            return Err(Error::InvalidState(alloc::format!("trace {tr} is not 1")));
        }
        if eigenvalues(&rho)[0] < -PSD_TOL {
            return Err(Error::InvalidState("density matrix has a negative eigenvalue".into()));
        }
        Ok(PairState { rho })
    }

    /// Wraps a matrix produced by a trace- and positivity-preserving map,
    /// re-symmetrizing away rounding drift.
    pub(crate) fn from_channel_output(rho: Mat4) -> Self {
        PairState { rho: (rho + rho.adjoint()) * c(0.5, 0.0) }
    }

    pub fn from_pure(amps: &[C64; 4]) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(crate::error::arg("state vector is not normalized"));
        }
        Ok(PairState { rho: outer(amps, amps) })
    }

    pub fn bell(label: BellLabel) -> Self {
        PairState { rho: outer(&label.amplitudes(), &label.amplitudes()) }
    }

    pub fn singlet() -> Self {
        Self::bell(BellLabel::PsiMinus)
    }

    pub fn maximally_mixed() -> Self {
        PairState { rho: quarter_identity() }
    }

    /// The z-basis product state `|a⟩|b⟩`.
    pub fn product_z(a: super::MeasOutcome, b: super::MeasOutcome) -> Self {
        let mut rho = Mat4::zeros();
        let i = basis_index(a, b);
        rho[(i, i)] = c(1.0, 0.0);
        PairState { rho }
    }

    pub fn rho(&self) -> &Mat4 {
        &self.rho
    }

    pub fn into_rho(self) -> Mat4 {
        self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// `⟨ψ|ρ|ψ⟩` for the named Bell state.
    pub fn bell_fidelity(&self, label: BellLabel) -> f64 {
        (self.rho * Self::bell(label).rho).trace().re
    }

    /// The Bell label this state equals (fidelity 1 within tolerance), if any.
    pub fn bell_label(&self) -> Option<BellLabel> {
        BellLabel::ALL
            .into_iter()
            .find(|&l| (self.bell_fidelity(l) - 1.0).abs() < EXACT_TOL)
    }

    /// Reduced single-qubit state of one side.
    pub fn reduced(&self, side: Side) -> Mat2 {
        Mat2::from_fn(|i, j| match side {
            Side::A => self.rho[(2 * i, 2 * j)] + self.rho[(2 * i + 1, 2 * j + 1)],
            Side::B => self.rho[(i, j)] + self.rho[(2 + i, 2 + j)],
        })
    }

    /// Conjugation `U ρ U†` with a unitary acting on the full pair.
    pub fn conjugate(&self, u: &Mat4) -> Self {
        Self::from_channel_output(u * self.rho * u.adjoint())
    }
}

pub(crate) fn basis_index(a: super::MeasOutcome, b: super::MeasOutcome) -> usize {
    let bit = |o: super::MeasOutcome| usize::from(o == super::MeasOutcome::Minus);
    2 * bit(a) + bit(b)
}

fn outer(u: &[C64; 4], v: &[C64; 4]) -> Mat4 {
    Matrix4::from_fn(|i, j| u[i] * v[j].conj())
}
