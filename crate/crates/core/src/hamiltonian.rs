//! The spin Hamiltonian `H = ∓S_z² − B·S_x` as a real symmetric tridiagonal
//! matrix in the `S_z` basis, ordered by descending `m`.
//!
//! `S_x` only couples `m ↔ m ± 1`, so the matrix is never stored densely. The
//! reflection `m → −m` commutes with `H`; the even and odd combinations
//! `(|m⟩ ± |−m⟩)/√2` split it into two tridiagonal blocks, and the two members
//! of each tunnelling doublet land in opposite blocks.

use std::fmt;
use std::str::FromStr;

use dashu::base::SquareRoot;
use dashu::integer::{IBig, UBig};
use dashu::rational::RBig;

use crate::domain::{FieldValue, SpinValue};
use crate::error::{Error, Result};
use crate::numeric::{self, Float};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Anisotropy {
    /// `H = −S_z² − B·S_x`
    #[default]
    EasyAxis,
    /// `H = +S_z² − B·S_x`
    EasyPlane,
}

impl Anisotropy {
    pub fn name(self) -> &'static str {
        match self {
            Anisotropy::EasyAxis => "easy-axis",
            Anisotropy::EasyPlane => "easy-plane",
        }
    }

    /// Sign of the `S_z²` term.
    pub fn sign(self) -> i64 {
        match self {
            Anisotropy::EasyAxis => -1,
            Anisotropy::EasyPlane => 1,
        }
    }
}

impl fmt::Display for Anisotropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Anisotropy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy-axis" | "easy_axis" => Ok(Anisotropy::EasyAxis),
            "easy-plane" | "easy_plane" => Ok(Anisotropy::EasyPlane),
            _ => Err(Error::InvalidConfig(format!("unknown anisotropy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Full,
    Even,
    Odd,
}

impl Parity {
    pub fn name(self) -> &'static str {
        match self {
            Parity::Full => "full",
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Symmetric tridiagonal matrix; only the sub-diagonal is stored.
#[derive(Debug, Clone)]
pub struct TridiagonalSystem {
    pub diag: Vec<Float>,
    pub offdiag: Vec<Float>,
    pub parity: Parity,
    pub digits: u32,
}

impl TridiagonalSystem {
    pub fn new(diag: Vec<Float>, offdiag: Vec<Float>, parity: Parity, digits: u32) -> Self {
        assert!(!diag.is_empty(), "empty system");
        assert_eq!(offdiag.len() + 1, diag.len(), "off-diagonal length");
        Self {
            diag,
            offdiag,
            parity,
            digits,
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn trace(&self) -> Float {
        let zero = numeric::int_float(0, self.digits);
        self.diag.iter().fold(zero, |acc, d| acc + d)
    }
}

/// `4·(S(S+1) − m(m−1))` in exact integer arithmetic, with `m = m_twice / 2`.
pub fn sx_radicand4(spin: SpinValue, m_twice: i64) -> Result<u64> {
    let t = i64::from(spin.twice());
    if m_twice > t || m_twice < 2 - t || (m_twice - t) % 2 != 0 {
        return Err(Error::OutOfRange(format!(
            "m = {m_twice}/2 for S = {spin} (need −S+1 ≤ m ≤ S)"
        )));
    }
    Ok((t * (t + 2) - m_twice * (m_twice - 2)) as u64)
}

/// `⟨m−1|S_x|m⟩ = ½·√(S(S+1) − m(m−1))`, one square root of an exact radicand.
pub fn sx_offdiag(spin: SpinValue, m_twice: i64, digits: u32) -> Result<Float> {
    let radicand = sx_radicand4(spin, m_twice)?;
    Ok(scaled_root(radicand, digits))
}

// √radicand / 4
fn scaled_root(radicand: u64, digits: u32) -> Float {
    let bits = numeric::bits_for_digits(digits);
    let r = Float::from(UBig::from(radicand))
        .with_precision(bits)
        .value();
    r.sqrt() / numeric::int_float(4, digits)
}

// Diagonal entry `sign·m²` at |m| = m_twice/2; exact in binary.
fn level_energy(kind: Anisotropy, m_twice: i64, digits: u32) -> Float {
    let bits = numeric::bits_for_digits(digits);
    let value = Float::from_parts(IBig::from(kind.sign() * m_twice * m_twice), -2);
    value.with_precision(bits).value()
}

/// Full `(2S+1)`-dimensional system in the `S_z` basis, `m = S, S−1, …, −S`.
pub fn build_full(
    spin: SpinValue,
    field: &FieldValue,
    kind: Anisotropy,
    digits: u32,
) -> TridiagonalSystem {
    let t = i64::from(spin.twice());
    let b = field.to_float(digits);
    let diag = (0..=t)
        .map(|i| level_energy(kind, t - 2 * i, digits))
        .collect();
    let offdiag = (0..t)
        .map(|i| {
            let s = sx_offdiag(spin, t - 2 * i, digits).expect("m in range");
            -(b.clone() * s)
        })
        .collect();
    TridiagonalSystem::new(diag, offdiag, Parity::Full, digits)
}

/// Even and odd reflection blocks, each ordered by descending `|m|`.
pub fn build_parity_blocks(
    spin: SpinValue,
    field: &FieldValue,
    kind: Anisotropy,
    digits: u32,
) -> (TridiagonalSystem, TridiagonalSystem) {
    let t = i64::from(spin.twice());
    let b = field.to_float(digits);
    let coupling =
        |m_twice: i64| -(b.clone() * sx_offdiag(spin, m_twice, digits).expect("in range"));

    if spin.is_integer() {
        // |m| = S..0 in the even block, S..1 in the odd block.
        let s = t / 2;
        let even_diag = (0..=s)
            .map(|j| level_energy(kind, 2 * (s - j), digits))
            .collect();
        let odd_diag = (0..s)
            .map(|j| level_energy(kind, 2 * (s - j), digits))
            .collect();
        let mut even_off: Vec<Float> = (0..s - 1).map(|j| coupling(2 * (s - j))).collect();
        // ⟨0|S_x|(|1⟩+|−1⟩)/√2⟩ carries an extra √2.
        let radicand = 2 * sx_radicand4(spin, 2).expect("m = 1 in range");
        even_off.push(-(b.clone() * scaled_root(radicand, digits)));
        let odd_off = (0..s - 1).map(|j| coupling(2 * (s - j))).collect();
        (
            TridiagonalSystem::new(even_diag, even_off, Parity::Even, digits),
            TridiagonalSystem::new(odd_diag, odd_off, Parity::Odd, digits),
        )
    } else {
        // |m| = S..1/2 in both blocks; ⟨−1/2|S_x|1/2⟩ = (S+1/2)/2 becomes a diagonal shift.
        let half_count = (t + 1) / 2;
        let diag: Vec<Float> = (0..half_count)
            .map(|j| level_energy(kind, t - 2 * j, digits))
            .collect();
        let off: Vec<Float> = (0..half_count - 1).map(|j| coupling(t - 2 * j)).collect();
        let shift_exact =
            field.exact().clone() * RBig::from_parts(IBig::from(t + 1), UBig::from(4u8));
        let shift = numeric::rational_to_float(&shift_exact, digits);
        let mut even_diag = diag.clone();
        let mut odd_diag = diag;
        let last = even_diag.len() - 1;
        even_diag[last] = even_diag[last].clone() - shift.clone();
        odd_diag[last] = odd_diag[last].clone() + shift;
        (
            TridiagonalSystem::new(even_diag, off.clone(), Parity::Even, digits),
            TridiagonalSystem::new(odd_diag, off, Parity::Odd, digits),
        )
    }
}

/// `Σ diag = ∓S(S+1)(2S+1)/3`, exact.
pub fn trace_exact(spin: SpinValue, kind: Anisotropy) -> RBig {
    let s = spin.as_rational();
    let one = RBig::ONE;
    let two = RBig::from(IBig::from(2));
    let value = &s * (&s + &one) * (&two * &s + &one) / RBig::from(IBig::from(3));
    RBig::from(IBig::from(kind.sign())) * value
}
