//! Value types shared by every method: spin, field, level, precision policy and results.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use dashu::base::{Abs, Signed};
use dashu::integer::{IBig, UBig};
use dashu::rational::RBig;

use crate::analytic;
use crate::error::{Error, Result};
use crate::hamiltonian::Anisotropy;
use crate::numeric::{self, Float};

/// Non-negative half-integer spin, stored as `2S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinValue {
    twice_s: u32,
}

impl SpinValue {
    pub fn from_twice(twice_s: u32) -> Result<Self> {
        if twice_s == 0 {
            return Err(Error::InvalidSpin("0".into()));
        }
        Ok(Self { twice_s })
    }

    /// Accepts `"3"`, `"5/2"`, `"2.5"` or `"3.0"`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidSpin(text.to_string());
        let trimmed = text.trim();
        let twice = if let Some((p, q)) = trimmed.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 || !(2 * p).is_multiple_of(q) {
                return Err(bad());
            }
            2 * p / q
        } else if let Some((int_part, frac)) = trimmed.split_once('.') {
            let int_part: u64 = int_part.parse().map_err(|_| bad())?;
            let frac = frac.trim_end_matches('0');
            match frac {
                "" => 2 * int_part,
                "5" => 2 * int_part + 1,
                _ => return Err(bad()),
            }
        } else {
            2 * trimmed.parse::<u64>().map_err(|_| bad())?
        };
        let twice = u32::try_from(twice).map_err(|_| bad())?;
        Self::from_twice(twice).map_err(|_| bad())
    }

    pub fn twice(self) -> u32 {
        self.twice_s
    }

    pub fn is_integer(self) -> bool {
        self.twice_s.is_multiple_of(2)
    }

    pub fn as_rational(self) -> RBig {
        RBig::from_parts(IBig::from(self.twice_s), UBig::from(2u8))
    }

    /// Dimension of the full spin space, `2S + 1`.
    pub fn dim(self) -> usize {
        self.twice_s as usize + 1
    }

    /// Number of tunnelling doublets: `S` for integer spin, `S + 1/2` otherwise.
    pub fn doublet_count(self) -> u32 {
        self.twice_s.div_ceil(2)
    }

    /// `S^2`, the largest unperturbed level magnitude.
    pub fn max_level_magnitude(self) -> RBig {
        let s = self.as_rational();
        &s * &s
    }
}

impl fmt::Display for SpinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice_s / 2)
        } else {
            write!(f, "{}/2", self.twice_s)
        }
    }
}

impl FromStr for SpinValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Exact decimal magnetic field in units of the anisotropy constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldValue {
    exact: RBig,
}

impl FieldValue {
    pub fn parse(text: &str) -> Result<Self> {
        numeric::parse_decimal(text)
            .map(|exact| Self { exact })
            .ok_or_else(|| Error::InvalidField(text.to_string(), "not a decimal number"))
    }

    /// Wraps a rational whose denominator divides a power of ten.
    pub fn from_rational(exact: RBig) -> Result<Self> {
        if numeric::exact_decimal(&exact).is_none() {
            return Err(Error::InvalidField(
                format!("{exact}"),
                "denominator is not a power of ten",
            ));
        }
        Ok(Self { exact })
    }

    pub fn exact(&self) -> &RBig {
        &self.exact
    }

    pub fn magnitude(&self) -> RBig {
        self.exact.clone().abs()
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.exact.is_positive()
    }

    pub fn negated(&self) -> Self {
        Self {
            exact: -self.exact.clone(),
        }
    }

    pub fn to_float(&self, digits: u32) -> Float {
        numeric::rational_to_float(&self.exact, digits)
    }

    pub fn require_nonzero(&self) -> Result<()> {
        if self.is_zero() {
            Err(Error::InvalidField("0".into(), "field must be non-zero"))
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for FieldValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = numeric::exact_decimal(&self.exact).expect("decimal field");
        f.write_str(&text)
    }
}

impl FromStr for FieldValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Doublet index `n` (ground doublet `n = 0`) and `sigma = S - n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelSpec {
    n: u32,
    sigma_twice: u32,
}

impl LevelSpec {
    pub fn new(spin: SpinValue, n: u32) -> Result<Self> {
        if n >= spin.doublet_count() {
            return Err(Error::InvalidLevel(format!(
                "level {n} out of range for S = {spin} (levels 0..={})",
                spin.doublet_count() - 1
            )));
        }
        Ok(Self {
            n,
            sigma_twice: spin.twice() - 2 * n,
        })
    }

    pub fn ground(spin: SpinValue) -> Self {
        Self::new(spin, 0).expect("ground doublet exists for S > 0")
    }

    /// All doublets of `spin`, ground first.
    pub fn all(spin: SpinValue) -> Vec<Self> {
        (0..spin.doublet_count())
            .map(|n| Self::new(spin, n).expect("in range"))
            .collect()
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn sigma_twice(self) -> u32 {
        self.sigma_twice
    }

    pub fn sigma(self) -> RBig {
        RBig::from_parts(IBig::from(self.sigma_twice), UBig::from(2u8))
    }

    /// The highest doublet of a half-integer spin, split at first order in the field.
    pub fn is_half_sigma(self) -> bool {
        self.sigma_twice == 1
    }

    /// Unperturbed energy `-sigma^2` of the doublet.
    pub fn unperturbed_energy(self) -> RBig {
        let s = self.sigma();
        -(&s * &s)
    }

    /// Index of the same doublet counted from the other end of the spectrum.
    pub fn mirrored(self, spin: SpinValue) -> Self {
        Self::new(spin, spin.doublet_count() - 1 - self.n).expect("mirror is in range")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecisionMode {
    Auto,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub mode: PrecisionMode,
    pub digits: u32,
    pub guard_digits: u32,
}

impl PrecisionPolicy {
    /// Smallest working precision ever used in auto mode.
    pub const FLOOR_DIGITS: u32 = 40;
    pub const DEFAULT_GUARD: u32 = 20;

    pub fn auto() -> Self {
        Self {
            mode: PrecisionMode::Auto,
            digits: Self::FLOOR_DIGITS,
            guard_digits: Self::DEFAULT_GUARD,
        }
    }

    pub fn fixed(digits: u32) -> Self {
        Self {
            mode: PrecisionMode::Fixed,
            digits,
            guard_digits: Self::DEFAULT_GUARD,
        }
    }

    /// Parses `auto` or `digits:N`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "auto" {
            return Ok(Self::auto());
        }
        let digits = text
            .strip_prefix("digits:")
            .and_then(|d| d.parse::<u32>().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| {
                Error::InvalidConfig(format!("precision `{text}`: expected auto or digits:N"))
            })?;
        Ok(Self::fixed(digits))
    }
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self::auto()
    }
}

impl fmt::Display for PrecisionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            PrecisionMode::Auto => f.write_str("auto"),
            PrecisionMode::Fixed => write!(f, "digits:{}", self.digits),
        }
    }
}

/// Working precision in decimal digits for computing the gap of `level`.
///
/// Auto mode sizes the precision from the leading-order gap so that the
/// subtraction of two eigenvalues of magnitude up to `S^2` keeps
/// `guard_digits` significant digits.
pub fn required_digits(
    spin: SpinValue,
    field: &FieldValue,
    level: LevelSpec,
    policy: PrecisionPolicy,
) -> u32 {
    if policy.mode == PrecisionMode::Fixed {
        return policy.digits;
    }
    if field.is_zero() {
        return PrecisionPolicy::FLOOR_DIGITS;
    }
    let estimate = analytic::leading_gap_exact(spin, level, field);
    let lost = -numeric::floor_log10(&estimate);
    let scale = numeric::ceil_log10(&spin.max_level_magnitude());
    let total = lost + scale + i64::from(policy.guard_digits);
    total.max(i64::from(PrecisionPolicy::FLOOR_DIGITS)) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Exact,
    Leading,
    Corrected,
    Bw,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Exact,
        Method::Leading,
        Method::Corrected,
        Method::Bw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Leading => "leading",
            Method::Corrected => "corrected",
            Method::Bw => "bw",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

/// One computed splitting.
#[derive(Debug, Clone)]
pub struct GapResult {
    pub spin: SpinValue,
    pub level: LevelSpec,
    pub field: FieldValue,
    pub method: Method,
    pub anisotropy: Anisotropy,
    /// Decimal rendering with `digits_used` significant digits.
    pub value: String,
    pub digits_used: u32,
    pub diagnostics: BTreeMap<String, String>,
    /// The same value at working precision, for cross-method arithmetic.
    pub number: Float,
    /// Present when the method produced an exact rational.
    pub exact: Option<RBig>,
}

impl GapResult {
    pub fn diagnostic(&self, key: &str) -> Option<&str> {
        self.diagnostics.get(key).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin(text: &str) -> SpinValue {
        SpinValue::parse(text).unwrap()
    }

    #[test]
    fn spin_forms() {
        assert_eq!(spin("5/2").twice(), 5);
        assert_eq!(spin("3").twice(), 6);
        assert_eq!(spin("2.5").twice(), 5);
        assert_eq!(spin("3.0").twice(), 6);
        assert_eq!(spin("4/2").twice(), 4);
        assert_eq!(spin("1/2").to_string(), "1/2");
        assert_eq!(spin("10").to_string(), "10");
    }

    #[test]
    fn spin_rejections() {
        for text in [
            "0.4", "0", "-1", "-1/2", "abc", "1/3", "2.25", "", "1/0", "0/2",
        ] {
            assert!(
                matches!(SpinValue::parse(text), Err(Error::InvalidSpin(_))),
                "{text} should be rejected"
            );
        }
    }

    #[test]
    fn level_ranges() {
        assert!(LevelSpec::new(spin("3"), 2).is_ok());
        assert!(LevelSpec::new(spin("3"), 3).is_err());
        let top = LevelSpec::new(spin("5/2"), 2).unwrap();
        assert!(top.is_half_sigma());
        assert!(LevelSpec::new(spin("5/2"), 3).is_err());
        assert_eq!(top.mirrored(spin("5/2")).n(), 0);
        assert_eq!(
            LevelSpec::new(spin("2"), 1).unwrap().unperturbed_energy(),
            RBig::from(IBig::from(-1))
        );
    }

    #[test]
    fn field_parsing() {
        let b = FieldValue::parse("0.50").unwrap();
        assert_eq!(b.to_string(), "0.5");
        assert_eq!(FieldValue::parse("1e-3").unwrap().to_string(), "0.001");
        assert!(FieldValue::parse("x").is_err());
        let third = RBig::from_parts(IBig::from(1), UBig::from(3u8));
        assert!(FieldValue::from_rational(third).is_err());
    }

    #[test]
    fn precision_parsing() {
        assert_eq!(
            PrecisionPolicy::parse("auto").unwrap(),
            PrecisionPolicy::auto()
        );
        assert_eq!(PrecisionPolicy::parse("digits:80").unwrap().digits, 80);
        assert!(PrecisionPolicy::parse("digits:0").is_err());
        assert!(PrecisionPolicy::parse("80").is_err());
    }

    #[test]
    fn required_digits_examples() {
        let auto = PrecisionPolicy::auto();
        let one = FieldValue::parse("1").unwrap();
        let s10 = spin("10");
        // Leading gap 3.135e-22 loses 22 digits, |eps_max| = 100 adds 2.
        assert_eq!(required_digits(s10, &one, LevelSpec::ground(s10), auto), 44);
        let s1 = spin("1");
        let half = FieldValue::parse("0.5").unwrap();
        assert_eq!(required_digits(s1, &half, LevelSpec::ground(s1), auto), 40);
        let s50 = spin("50");
        assert_eq!(
            required_digits(s50, &one, LevelSpec::ground(s50), auto),
            208
        );
        assert_eq!(
            required_digits(
                s50,
                &one,
                LevelSpec::ground(s50),
                PrecisionPolicy::fixed(240)
            ),
            240
        );
    }
}
