//! Closed-form splittings in exact rational arithmetic.
//!
//! For a doublet with `σ = S − n ≥ 1`:
//!
//! ```text
//! ΔE_n = (2S−n)! / (2^(2S−2n−1) · n! · ((2S−2n−1)!)²) · B^(2S−2n) · (1 − γ·B²)
//! γ    = (2S+1)²(σ+1) / (2(2σ−1)²(2σ+1)²)
//! ```
//!
//! The highest doublet of a half-integer spin (`σ = 1/2`) splits at first
//! order: `ΔE = (S+1/2)·B·(1 − (S+3/2)(S−1/2)B²/16)`.
//!
//! `γ` is the negated sum of three coefficients of `B²`: the field dependence
//! of the intermediate denominators (`ξ₁`), second-order level repulsion in the
//! secular equation (`ξ₂`) and single to-and-fro excursions along the
//! tunnelling path (`ξ₃`).

use std::collections::BTreeMap;

use dashu::integer::{IBig, UBig};
use dashu::rational::RBig;

use crate::domain::{
    required_digits, FieldValue, GapResult, LevelSpec, Method, PrecisionPolicy, SpinValue,
};
use crate::error::{Error, Result};
use crate::hamiltonian::Anisotropy;
use crate::numeric;

pub type RationalCoefficient = RBig;

fn int(value: i64) -> RBig {
    RBig::from(IBig::from(value))
}

fn frac(num: i64, den: u64) -> RBig {
    RBig::from_parts(IBig::from(num), UBig::from(den))
}

pub fn factorial(n: u64) -> UBig {
    (2..=n).fold(UBig::ONE, |acc, k| acc * UBig::from(k))
}

/// `H_k = Σ_{j=1}^{k} 1/j`.
pub fn harmonic(k: u64) -> RBig {
    (1..=k).fold(RBig::ZERO, |acc, j| acc + frac(1, j))
}

fn check_level(spin: SpinValue, level: LevelSpec) -> Result<()> {
    if level.n() >= spin.doublet_count() || level.sigma_twice() + 2 * level.n() != spin.twice() {
        return Err(Error::InvalidLevel(format!(
            "level {} does not belong to S = {spin}",
            level.n()
        )));
    }
    Ok(())
}

fn require_integer_sigma_branch(spin: SpinValue, level: LevelSpec, what: &str) -> Result<()> {
    check_level(spin, level)?;
    if level.is_half_sigma() {
        return Err(Error::InvalidLevel(format!(
            "{what} is undefined for σ = 1/2; the highest half-integer doublet has its own formula"
        )));
    }
    Ok(())
}

/// Coefficient of `|B|^(2σ)` in the leading-order gap.
pub fn leading_coefficient(spin: SpinValue, level: LevelSpec) -> RBig {
    let t = u64::from(spin.twice());
    let n = u64::from(level.n());
    if level.is_half_sigma() {
        return frac(t as i64 + 1, 2);
    }
    let two_sigma = t - 2 * n;
    let inner = factorial(two_sigma - 1);
    let den = (UBig::ONE << (two_sigma as usize - 1)) * factorial(n) * &inner * &inner;
    RBig::from_parts(IBig::from(factorial(t - n)), den)
}

/// Leading-order gap as an exact rational in `|B|`.
pub fn leading_gap_exact(spin: SpinValue, level: LevelSpec, field: &FieldValue) -> RBig {
    let power = level.sigma_twice() as usize;
    leading_coefficient(spin, level) * pow(&field.magnitude(), power)
}

fn pow(base: &RBig, exponent: usize) -> RBig {
    (0..exponent).fold(RBig::ONE, |acc, _| acc * base)
}

/// First-correction coefficient `γ` (of `−B²`) for `σ ≥ 1`.
pub fn gamma(spin: SpinValue, level: LevelSpec) -> Result<RationalCoefficient> {
    require_integer_sigma_branch(spin, level, "γ")?;
    let t = i64::from(spin.twice());
    let two_sigma = i64::from(level.sigma_twice());
    let num = (t + 1) * (t + 1) * (two_sigma + 2);
    let den = 4 * (two_sigma - 1).pow(2) * (two_sigma + 1).pow(2);
    Ok(frac(num, den as u64))
}

/// Fractional correction `c` with `ΔE = ΔE⁽⁰⁾·(1 − c·B²)`, for either branch.
pub fn correction_coefficient(spin: SpinValue, level: LevelSpec) -> Result<RBig> {
    check_level(spin, level)?;
    if level.is_half_sigma() {
        // (S+3/2)(S−1/2)/16 = (2S+3)(2S−1)/64
        let t = i64::from(spin.twice());
        Ok(frac((t + 3) * (t - 1), 64))
    } else {
        gamma(spin, level)
    }
}

pub fn corrected_gap_exact(spin: SpinValue, level: LevelSpec, field: &FieldValue) -> Result<RBig> {
    let c = correction_coefficient(spin, level)?;
    let b2 = field.magnitude() * field.magnitude();
    Ok(leading_gap_exact(spin, level, field) * (RBig::ONE - c * b2))
}

fn analytic_result(
    spin: SpinValue,
    level: LevelSpec,
    field: &FieldValue,
    policy: PrecisionPolicy,
    method: Method,
    value: RBig,
    diagnostics: BTreeMap<String, String>,
) -> GapResult {
    let digits = required_digits(spin, field, level, policy);
    GapResult {
        spin,
        level,
        field: field.clone(),
        method,
        anisotropy: Anisotropy::EasyAxis,
        value: numeric::format_rational(&value, digits as usize),
        digits_used: digits,
        diagnostics,
        number: numeric::rational_to_float(&value, digits),
        exact: Some(value),
    }
}

pub fn leading_gap(
    spin: SpinValue,
    level: LevelSpec,
    field: &FieldValue,
    policy: PrecisionPolicy,
) -> Result<GapResult> {
    check_level(spin, level)?;
    field.require_nonzero()?;
    let value = leading_gap_exact(spin, level, field);
    Ok(analytic_result(
        spin,
        level,
        field,
        policy,
        Method::Leading,
        value,
        BTreeMap::new(),
    ))
}

pub fn corrected_gap(
    spin: SpinValue,
    level: LevelSpec,
    field: &FieldValue,
    policy: PrecisionPolicy,
) -> Result<GapResult> {
    field.require_nonzero()?;
    let value = corrected_gap_exact(spin, level, field)?;
    let correction = correction_coefficient(spin, level)? * field.magnitude() * field.magnitude();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert(
        "correction".to_string(),
        numeric::format_rational(&correction, 12),
    );
    if correction >= frac(1, 2) {
        diagnostics.insert(
            "warning".to_string(),
            "correction_regime_exceeded".to_string(),
        );
    }
    Ok(analytic_result(
        spin,
        level,
        field,
        policy,
        Method::Corrected,
        value,
        diagnostics,
    ))
}

/// Coefficient of `B²` from the field dependence of the intermediate denominators.
pub fn xi1(spin: SpinValue, level: LevelSpec) -> Result<RationalCoefficient> {
    require_integer_sigma_branch(spin, level, "ξ₁")?;
    let s = spin.as_rational();
    let n = int(i64::from(level.n()));
    let two_sigma = i64::from(level.sigma_twice());
    let bracket = &n * &n - int(2) * &s * &n + &s * (int(2) * &s + RBig::ONE);
    let den = int(two_sigma * (two_sigma * two_sigma - 1));
    Ok(-(bracket / den) * harmonic((two_sigma - 1) as u64))
}

/// Coefficient of `B²` from the second-order terms of the secular equation.
pub fn xi2(spin: SpinValue, level: LevelSpec) -> Result<RationalCoefficient> {
    require_integer_sigma_branch(spin, level, "ξ₂")?;
    let t = i64::from(spin.twice());
    let n = i64::from(level.n());
    let two_sigma = i64::from(level.sigma_twice());
    let first = frac(
        (n + 1) * (t - n),
        ((two_sigma - 1) * (two_sigma - 1)) as u64,
    );
    let second = frac(n * (t - n + 1), ((two_sigma + 1) * (two_sigma + 1)) as u64);
    Ok(-(first + second) / int(4))
}

/// Coefficient of `B²` from extra to-and-fro jumps along the path `σ → −σ`.
///
/// Only the ground doublet is supported: for `n > 0` the path passes the
/// degenerate partner level and the excursion bookkeeping is not defined.
pub fn xi3(spin: SpinValue, level: LevelSpec) -> Result<RationalCoefficient> {
    check_level(spin, level)?;
    if level.n() != 0 {
        return Err(Error::UnsupportedLevel(format!(
            "ξ₃ is only defined for the ground doublet, got n = {}",
            level.n()
        )));
    }
    let t = i64::from(spin.twice());
    let two_sigma = t;
    let mut sum = RBig::ZERO;
    for k in 2..t {
        // V²_{m,m−1}/B² = (S(S+1) − m(m−1))/4 at m = σ − k + 1, in twice-units.
        let m2 = two_sigma - 2 * k + 2;
        let v_sq = frac(t * (t + 2) - m2 * (m2 - 2), 16);
        // α_{σ−j} = −j(2σ − j) at E = ε_σ
        let alpha = |j: i64| -j * (two_sigma - j);
        sum += v_sq / int(alpha(k) * alpha(k - 1));
    }
    Ok(sum)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XiIdentityReport {
    pub holds: bool,
    /// `ξ₁ + ξ₂ + ξ₃`
    pub lhs: RationalCoefficient,
    /// `−γ`
    pub rhs: RationalCoefficient,
}

/// Exact check that the three constituents add up to `−γ` for the ground doublet.
pub fn xi_identity_report(spin: SpinValue) -> Result<XiIdentityReport> {
    let level = LevelSpec::ground(spin);
    let lhs = xi1(spin, level)? + xi2(spin, level)? + xi3(spin, level)?;
    let rhs = -gamma(spin, level)?;
    Ok(XiIdentityReport {
        holds: lhs == rhs,
        lhs,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin(text: &str) -> SpinValue {
        SpinValue::parse(text).unwrap()
    }

    fn field(text: &str) -> FieldValue {
        FieldValue::parse(text).unwrap()
    }

    fn level(s: SpinValue, n: u32) -> LevelSpec {
        LevelSpec::new(s, n).unwrap()
    }

    fn q(num: i64, den: u64) -> RBig {
        frac(num, den)
    }

    #[test]
    fn leading_examples() {
        let s2 = spin("2");
        assert_eq!(
            leading_gap_exact(s2, level(s2, 1), &field("0.1")),
            q(3, 100)
        );
        let s10 = spin("10");
        let expected = RBig::from_parts(IBig::from(100), (UBig::ONE << 17) * factorial(20));
        assert_eq!(leading_gap_exact(s10, level(s10, 0), &field("1")), expected);
        let g = leading_gap(s10, level(s10, 0), &field("1"), PrecisionPolicy::auto()).unwrap();
        assert!(g.value.starts_with("3.13592"), "{}", g.value);
        assert!(g.value.ends_with("e-22"));
        let half = spin("1/2");
        assert_eq!(
            leading_gap_exact(half, level(half, 0), &field("0.2")),
            q(1, 5)
        );
    }

    #[test]
    fn leading_uses_field_magnitude() {
        let s = spin("3/2");
        assert_eq!(
            leading_gap_exact(s, level(s, 0), &field("-0.1")),
            leading_gap_exact(s, level(s, 0), &field("0.1"))
        );
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(spin("1"), level(spin("1"), 0)).unwrap(), q(1, 1));
        assert_eq!(gamma(spin("2"), level(spin("2"), 1)).unwrap(), q(25, 9));
        assert_eq!(gamma(spin("10"), level(spin("10"), 0)).unwrap(), q(11, 722));
        assert!(matches!(
            gamma(spin("3/2"), level(spin("3/2"), 1)),
            Err(Error::InvalidLevel(_))
        ));
    }

    #[test]
    fn corrected_examples() {
        let s1 = spin("1");
        let b = field("0.3");
        let b2 = q(9, 100);
        assert_eq!(
            corrected_gap_exact(s1, level(s1, 0), &b).unwrap(),
            b2.clone() * (RBig::ONE - b2)
        );
        let s = spin("3/2");
        let b = q(3, 10);
        assert_eq!(
            corrected_gap_exact(s, level(s, 1), &field("0.3")).unwrap(),
            int(2) * &b * (RBig::ONE - int(3) * &b * &b / int(16))
        );
        let s10 = spin("10");
        let g = corrected_gap(s10, level(s10, 0), &field("1"), PrecisionPolicy::auto()).unwrap();
        assert!(g.value.starts_with("3.08814"), "{}", g.value);
        assert!(g.diagnostic("warning").is_none());
        let half = spin("1/2");
        let g =
            corrected_gap(half, level(half, 0), &field("0.2"), PrecisionPolicy::auto()).unwrap();
        assert_eq!(g.value, "0.2");
    }

    #[test]
    fn corrected_warns_outside_regime() {
        let s1 = spin("1");
        let g = corrected_gap(s1, level(s1, 0), &field("0.8"), PrecisionPolicy::auto()).unwrap();
        assert_eq!(g.diagnostic("warning"), Some("correction_regime_exceeded"));
    }

    #[test]
    fn level_mismatch_is_rejected() {
        let wrong = level(spin("3"), 2);
        assert!(matches!(
            leading_gap(spin("1"), wrong, &field("0.1"), PrecisionPolicy::auto()),
            Err(Error::InvalidLevel(_))
        ));
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi1(spin("1"), level(spin("1"), 0)).unwrap(), q(-1, 2));
        assert_eq!(xi1(spin("2"), level(spin("2"), 0)).unwrap(), q(-11, 36));
        assert_eq!(xi1(spin("3/2"), level(spin("3/2"), 0)).unwrap(), q(-3, 8));
        assert_eq!(xi2(spin("1"), level(spin("1"), 0)).unwrap(), q(-1, 2));
        assert_eq!(xi2(spin("2"), level(spin("2"), 0)).unwrap(), q(-1, 9));
        assert_eq!(xi2(spin("2"), level(spin("2"), 1)).unwrap(), q(-29, 18));
        assert_eq!(xi3(spin("1"), level(spin("1"), 0)).unwrap(), RBig::ZERO);
        assert_eq!(xi3(spin("2"), level(spin("2"), 0)).unwrap(), q(1, 4));
        assert_eq!(xi3(spin("3/2"), level(spin("3/2"), 0)).unwrap(), q(1, 4));
        assert!(matches!(
            xi3(spin("2"), level(spin("2"), 1)),
            Err(Error::UnsupportedLevel(_))
        ));
        assert!(matches!(
            xi1(spin("1/2"), level(spin("1/2"), 0)),
            Err(Error::InvalidLevel(_))
        ));
    }

    #[test]
    fn xi_identity_examples() {
        for (s, expected) in [("1", q(-1, 1)), ("2", q(-1, 6)), ("3/2", q(-5, 16))] {
            let report = xi_identity_report(spin(s)).unwrap();
            assert!(report.holds, "S = {s}");
            assert_eq!(report.lhs, expected);
        }
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(3), q(11, 6));
        assert_eq!(harmonic(0), RBig::ZERO);
    }
}
