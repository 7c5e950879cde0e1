use core::fmt;
use core::str::FromStr;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::{c, Mat2, C64};
use crate::error::{arg, Error};

/// One of the four single-qubit unitaries the parties apply.
///
/// Internally a 2-bit code: bit 0 is the X (bit-flip) part, bit 1 the Z
/// (phase) part. Products modulo global phase are then XOR of codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub const ALL: [PauliOp; 4] = [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z];

    pub const fn code(self) -> u8 {
        match self {
            PauliOp::I => 0,
            PauliOp::X => 1,
            PauliOp::Z => 2,
            PauliOp::Y => 3,
        }
    }

    pub const fn from_code(code: u8) -> PauliOp {
        match code & 3 {
            0 => PauliOp::I,
            1 => PauliOp::X,
            2 => PauliOp::Z,
            _ => PauliOp::Y,
        }
    }

    /// Product `self · other` modulo global phase.
    pub const fn compose(self, other: PauliOp) -> PauliOp {
        PauliOp::from_code(self.code() ^ other.code())
    }

    /// True when the operator flips the z-basis value of a qubit (X or Y).
    pub const fn flips_z(self) -> bool {
        self.code() & 1 == 1
    }

    pub fn matrix(self) -> Mat2 {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        match self {
            PauliOp::I => Matrix2::new(one, z, z, one),
            PauliOp::X => Matrix2::new(z, one, one, z),
            PauliOp::Y => Matrix2::new(z, c(0.0, -1.0), c(0.0, 1.0), z),
            PauliOp::Z => Matrix2::new(one, z, z, -one),
        }
    }

    /// Signs `(sx, sy, sz)` of the Bloch-vector reflection `P σ_n P = σ_{R n}`.
    pub const fn bloch_signs(self) -> [f64; 3] {
        match self {
            PauliOp::I => [1.0, 1.0, 1.0],
            PauliOp::X => [1.0, -1.0, -1.0],
            PauliOp::Y => [-1.0, 1.0, -1.0],
            PauliOp::Z => [-1.0, -1.0, 1.0],
        }
    }

    pub const fn as_char(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for PauliOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" => Ok(PauliOp::I),
            "X" => Ok(PauliOp::X),
            "Y" => Ok(PauliOp::Y),
            "Z" => Ok(PauliOp::Z),
            other => Err(arg(alloc::format!("unknown Pauli operator {other:?}"))),
        }
    }
}

/// Which qubit of a pair an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// The four maximally entangled two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellLabel {
    PsiMinus,
    PsiPlus,
    PhiMinus,
    PhiPlus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PsiMinus,
        BellLabel::PsiPlus,
        BellLabel::PhiMinus,
        BellLabel::PhiPlus,
    ];

    /// The label of `(p ⊗ I)|ψ−⟩` modulo phase.
    pub const fn from_singlet_pauli(p: PauliOp) -> BellLabel {
        match p {
            PauliOp::I => BellLabel::PsiMinus,
            PauliOp::Z => BellLabel::PsiPlus,
            PauliOp::X => BellLabel::PhiMinus,
            PauliOp::Y => BellLabel::PhiPlus,
        }
    }

    /// Inverse of [`BellLabel::from_singlet_pauli`].
    pub const fn singlet_pauli(self) -> PauliOp {
        match self {
            BellLabel::PsiMinus => PauliOp::I,
            BellLabel::PsiPlus => PauliOp::Z,
            BellLabel::PhiMinus => PauliOp::X,
            BellLabel::PhiPlus => PauliOp::Y,
        }
    }

    /// State vector in the basis `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.
    pub fn amplitudes(self) -> [C64; 4] {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let (z, p, m) = (c(0.0, 0.0), c(h, 0.0), c(-h, 0.0));
        match self {
            BellLabel::PsiMinus => [z, p, m, z],
            BellLabel::PsiPlus => [z, p, p, z],
            BellLabel::PhiMinus => [p, z, z, m],
            BellLabel::PhiPlus => [p, z, z, p],
        }
    }
}

/// Bell label of `(pa ⊗ pb)|ψ−⟩` modulo global phase.
///
/// A one-sided Pauli on the B qubit of a singlet acts like the same Pauli on
/// the A qubit, so the two layers simply compose.
pub const fn pauli_on_singlet_label(pa: PauliOp, pb: PauliOp) -> BellLabel {
    BellLabel::from_singlet_pauli(pa.compose(pb))
}

/// Product of the two z-basis outcomes a Bell state always produces.
pub const fn zcorr(label: BellLabel) -> super::MeasOutcome {
    match label {
        BellLabel::PsiMinus | BellLabel::PsiPlus => super::MeasOutcome::Minus,
        BellLabel::PhiMinus | BellLabel::PhiPlus => super::MeasOutcome::Plus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_is_klein_four() {
        for p in PauliOp::ALL {
            assert_eq!(p.compose(p), PauliOp::I);
            assert_eq!(p.compose(PauliOp::I), p);
            for q in PauliOp::ALL {
                assert_eq!(p.compose(q), q.compose(p));
                for r in PauliOp::ALL {
                    assert_eq!(p.compose(q).compose(r), p.compose(q.compose(r)));
                }
            }
        }
        assert_eq!(PauliOp::X.compose(PauliOp::Y), PauliOp::Z);
        assert_eq!(PauliOp::X.compose(PauliOp::Z), PauliOp::Y);
    }

    #[test]
    fn compose_matches_matrix_product_up_to_phase() {
        for p in PauliOp::ALL {
            for q in PauliOp::ALL {
                let prod = p.matrix() * q.matrix();
                let target = p.compose(q).matrix();
                // prod = phase · target with |phase| = 1
                let overlap = (target.adjoint() * prod).trace() / c(2.0, 0.0);
                assert!((overlap.norm() - 1.0).abs() < 1e-12, "{p}{q}");
            }
        }
    }

    #[test]
    fn squares_are_identity() {
        for p in PauliOp::ALL {
            let sq = p.matrix() * p.matrix();
            assert!((sq - PauliOp::I.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn labels_biject_with_paulis() {
        for p in PauliOp::ALL {
            assert_eq!(BellLabel::from_singlet_pauli(p).singlet_pauli(), p);
        }
    }

    #[test]
    fn parse_roundtrip() {
        for p in PauliOp::ALL {
            let s = alloc::string::ToString::to_string(&p);
            assert_eq!(s.parse::<PauliOp>().unwrap(), p);
        }
        assert!("W".parse::<PauliOp>().is_err());
    }

    #[test]
    fn label_table_examples() {
        assert_eq!(pauli_on_singlet_label(PauliOp::I, PauliOp::I), BellLabel::PsiMinus);
        assert_eq!(pauli_on_singlet_label(PauliOp::Z, PauliOp::I), BellLabel::PsiPlus);
        assert_eq!(pauli_on_singlet_label(PauliOp::X, PauliOp::Y), BellLabel::PsiPlus);
    }
}
