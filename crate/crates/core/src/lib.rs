//! Tunnelling splittings of the anisotropic spin Hamiltonian `H = −S_z² − B·S_x`.
//!
//! Four independent routes to the same gap:
//!
//! * [`spectrum::exact_gap`]: certified arbitrary-precision bisection of the
//!   parity-resolved tridiagonal Hamiltonian;
//! * [`analytic::leading_gap`] and [`analytic::corrected_gap`]: closed forms
//!   in exact rational arithmetic, without and with the `B²` correction;
//! * [`bw::bw_gap`]: self-consistent solution of the resummed
//!   Brillouin–Wigner secular equation.
//!
//! [`harness`] ties them together into sweeps, comparisons and power-law fits.

pub mod analytic;
pub mod bw;
pub mod domain;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod numeric;
pub mod spectrum;

pub use domain::{
    required_digits, FieldValue, GapResult, LevelSpec, Method, PrecisionMode, PrecisionPolicy,
    SpinValue,
};
pub use error::{Error, Result};
pub use hamiltonian::{Anisotropy, Parity, TridiagonalSystem};
pub use numeric::Float;
