//! Exact two-qubit state core.
//!
//! Pairs are independent `4×4` density matrices. Alongside the matrix path,
//! [`pauli_on_singlet_label`] and [`zcorr`] give a label-level description of
//! the noiseless Pauli/Bell fragment; the two must agree.

mod ops;
mod pauli;
mod state;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex;

pub use ops::{
    apply_pauli, average_state, bell_state, depolarize, ensemble_density, measure_axis,
    measure_z_joint, negativity, partial_transpose, paulis_on_singlet, trace_distance, PureLabel,
    ZProduct,
};
pub use pauli::{pauli_on_singlet_label, zcorr, BellLabel, PauliOp, Side};
pub use state::{
    eigenvalues, is_hermitian, kron, lift, quarter_identity, Axis, MeasOutcome, PairState,
    EIGEN_TOL, EXACT_TOL, PSD_TOL,
};

pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

#[inline]
pub(crate) const fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}
