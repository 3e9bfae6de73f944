//! Certified eigenvalues of symmetric tridiagonal systems by Sturm-count
//! bisection, and tunnelling gaps from the parity-resolved spectrum.
//!
//! Every eigenvalue is returned with an enclosing interval `[lo, hi)` such
//! that exactly the right number of eigenvalues lies below `lo` and `hi`.
//! Gaps are differences of two such enclosures taken from opposite parity
//! blocks, so the working precision must cover the magnitude of the levels
//! plus the number of digits the gap sits below them.

use std::collections::BTreeMap;

use crate::domain::{
    required_digits, FieldValue, GapResult, LevelSpec, Method, PrecisionPolicy, SpinValue,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_parity_blocks, Anisotropy, Parity, TridiagonalSystem};
use crate::numeric::{self, Float};

/// Relative width the two gap enclosures must reach.
pub const GAP_CERTIFICATE_EXPONENT: i64 = -10;

/// `(lower, upper)` Gershgorin bounds on the spectrum.
pub fn gershgorin(system: &TridiagonalSystem) -> (Float, Float) {
    let n = system.dim();
    let mut lower: Option<Float> = None;
    let mut upper: Option<Float> = None;
    for i in 0..n {
        let mut radius = numeric::int_float(0, system.digits);
        if i > 0 {
            radius += numeric::abs_float(&system.offdiag[i - 1]);
        }
        if i + 1 < n {
            radius += numeric::abs_float(&system.offdiag[i]);
        }
        let lo = system.diag[i].clone() - &radius;
        let hi = system.diag[i].clone() + &radius;
        lower = Some(match lower {
            Some(l) if l <= lo => l,
            _ => lo,
        });
        upper = Some(match upper {
            Some(u) if u >= hi => u,
            _ => hi,
        });
    }
    (lower.expect("non-empty"), upper.expect("non-empty"))
}

/// Prepared Sturm recurrence: squared couplings and the zero-pivot replacement.
#[derive(Debug, Clone)]
pub struct Sturm<'a> {
    system: &'a TridiagonalSystem,
    offdiag_sq: Vec<Float>,
    /// Pivots that vanish exactly are replaced by `−tiny = −10^(−digits)·scale`.
    tiny: Float,
    lower: Float,
    upper: Float,
    scale: Float,
}

impl<'a> Sturm<'a> {
    pub fn new(system: &'a TridiagonalSystem) -> Self {
        let (lower, upper) = gershgorin(system);
        let one = numeric::int_float(1, system.digits);
        let scale = numeric::max_float(
            numeric::max_float(numeric::abs_float(&lower), numeric::abs_float(&upper)),
            one,
        );
        let tiny = numeric::pow10(-i64::from(system.digits), system.digits) * &scale;
        let offdiag_sq = system.offdiag.iter().map(|e| e.clone() * e).collect();
        Self {
            system,
            offdiag_sq,
            tiny,
            lower,
            upper,
            scale,
        }
    }

    pub fn system(&self) -> &TridiagonalSystem {
        self.system
    }

    /// Largest Gershgorin magnitude, at least one.
    pub fn scale(&self) -> &Float {
        &self.scale
    }

    /// Bracket `[lower − 1, upper + 1]` that strictly contains the spectrum.
    pub fn bracket(&self) -> (Float, Float) {
        let one = numeric::int_float(1, self.system.digits);
        (self.lower.clone() - &one, self.upper.clone() + one)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count(&self, x: &Float) -> usize {
        let diag = &self.system.diag;
        let mut negatives = 0;
        let mut q = Float::ZERO;
        for (i, d) in diag.iter().enumerate() {
            q = match i {
                0 => d.clone() - x,
                _ => (d.clone() - x) - self.offdiag_sq[i - 1].clone() / &q,
            };
            if q.repr().is_zero() {
                q = -self.tiny.clone();
            }
            if q < Float::ZERO {
                negatives += 1;
            }
        }
        negatives
    }

    /// Smallest enclosure width this precision can certify.
    pub fn min_width(&self) -> Float {
        numeric::pow10(2 - i64::from(self.system.digits), self.system.digits) * &self.scale
    }

    fn check_width(&self, target_width: &Float) -> Result<()> {
        if *target_width < self.min_width() {
            return Err(Error::PrecisionExhausted(format!(
                "target width {} is below the resolution of {} digits",
                numeric::format_float(target_width, 6),
                self.system.digits
            )));
        }
        Ok(())
    }

    /// Encloses eigenvalue `index` (ascending, 0-based) in `[lo, hi)` with `hi − lo ≤ target_width`.
    pub fn bisect(&self, index: usize, target_width: &Float) -> Result<Enclosure> {
        assert!(index < self.system.dim(), "eigenvalue index out of range");
        self.check_width(target_width)?;
        let (mut lo, mut hi) = self.bracket();
        let two = numeric::int_float(2, self.system.digits);
        let mut steps = 0;
        while hi.clone() - &lo > *target_width {
            let mid = (lo.clone() + &hi) / &two;
            if mid <= lo || mid >= hi {
                return Err(Error::PrecisionExhausted(format!(
                    "bisection stalled at {} digits",
                    self.system.digits
                )));
            }
            if self.count(&mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
            steps += 1;
        }
        Ok(Enclosure { lo, hi, steps })
    }
}

/// Certified interval around one eigenvalue.
#[derive(Debug, Clone)]
pub struct Enclosure {
    pub lo: Float,
    pub hi: Float,
    pub steps: usize,
}

impl Enclosure {
    pub fn midpoint(&self) -> Float {
        let two = Float::from(2);
        (self.lo.clone() + &self.hi) / two
    }

    pub fn width(&self) -> Float {
        self.hi.clone() - &self.lo
    }
}

/// Number of eigenvalues of `system` strictly below `x`.
pub fn sturm_count(system: &TridiagonalSystem, x: &Float) -> usize {
    Sturm::new(system).count(x)
}

#[derive(Debug, Clone)]
pub struct EigenvalueSet {
    /// Ascending interval midpoints.
    pub values: Vec<Float>,
    /// Block of origin, aligned with `values`, when computed blockwise.
    pub parity_labels: Option<Vec<Parity>>,
    pub digits: u32,
    pub max_interval_width: Float,
}

impl EigenvalueSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> Float {
        let zero = numeric::int_float(0, self.digits);
        self.values.iter().fold(zero, |acc, v| acc + v)
    }
}

#[cfg(feature = "parallel")]
fn map_indices<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indices<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

fn enclose_all(system: &TridiagonalSystem, target_width: &Float) -> Result<Vec<Enclosure>> {
    let sturm = Sturm::new(system);
    sturm.check_width(target_width)?;
    map_indices(system.dim(), |k| sturm.bisect(k, target_width))
        .into_iter()
        .collect()
}

/// All eigenvalues, each bisected to `target_width`.
pub fn eigenvalues(system: &TridiagonalSystem, target_width: &Float) -> Result<EigenvalueSet> {
    let enclosures = enclose_all(system, target_width)?;
    Ok(collect(
        system.digits,
        enclosures.into_iter().map(|e| (e, system.parity)),
        false,
    ))
}

/// Merged spectrum of the even and odd blocks, labelled by block.
pub fn eigenvalues_blockwise(
    even: &TridiagonalSystem,
    odd: &TridiagonalSystem,
    target_width: &Float,
) -> Result<EigenvalueSet> {
    let digits = even.digits.max(odd.digits);
    let even_enc = enclose_all(even, target_width)?;
    let odd_enc = enclose_all(odd, target_width)?;
    let labelled = even_enc
        .into_iter()
        .map(|e| (e, Parity::Even))
        .chain(odd_enc.into_iter().map(|e| (e, Parity::Odd)));
    Ok(collect(digits, labelled, true))
}

fn collect(
    digits: u32,
    enclosures: impl Iterator<Item = (Enclosure, Parity)>,
    labelled: bool,
) -> EigenvalueSet {
    let mut items: Vec<(Float, Parity, Float)> = enclosures
        .map(|(e, p)| (e.midpoint(), p, e.width()))
        .collect();
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));
    let max_interval_width = items
        .iter()
        .map(|i| i.2.clone())
        .fold(numeric::int_float(0, digits), numeric::max_float);
    EigenvalueSet {
        values: items.iter().map(|i| i.0.clone()).collect(),
        parity_labels: labelled.then(|| items.iter().map(|i| i.1).collect()),
        digits,
        max_interval_width,
    }
}

/// Tunnelling gap of `level` from the parity-resolved exact spectrum.
///
/// Easy-axis level `n` pairs the `(n+1)`-th smallest eigenvalue of each block.
/// Easy-plane spectra are the negated easy-axis ones, so level `n` there is
/// counted from the bottom of the easy-plane spectrum and pairs the
/// `(count − n)`-th largest eigenvalue of each block.
pub fn exact_gap(
    spin: SpinValue,
    field: &FieldValue,
    level: LevelSpec,
    kind: Anisotropy,
    policy: PrecisionPolicy,
) -> Result<GapResult> {
    field.require_nonzero()?;
    let axis_level = match kind {
        Anisotropy::EasyAxis => level,
        Anisotropy::EasyPlane => level.mirrored(spin),
    };
    let digits = required_digits(spin, field, axis_level, policy);
    let (even, odd) = build_parity_blocks(spin, field, kind, digits);
    let even_sturm = Sturm::new(&even);
    let odd_sturm = Sturm::new(&odd);

    let from_bottom = axis_level.n() as usize;
    let (k_even, k_odd, lower_position) = match kind {
        Anisotropy::EasyAxis => (from_bottom, from_bottom, 2 * from_bottom),
        Anisotropy::EasyPlane => (
            even.dim() - 1 - from_bottom,
            odd.dim() - 1 - from_bottom,
            spin.dim() - 2 * from_bottom - 2,
        ),
    };

    // Bisect both members close to the resolution floor; the auto precision
    // leaves `guard_digits` between that floor and the predicted gap.
    let floor_width = even_sturm
        .min_width()
        .max(odd_sturm.min_width().clone())
        .clone();
    let width = floor_width * numeric::int_float(100, digits);
    let e_even = even_sturm.bisect(k_even, &width)?;
    let e_odd = odd_sturm.bisect(k_odd, &width)?;
    let gap = numeric::abs_float(&(e_even.midpoint() - e_odd.midpoint()));
    let certificate = e_even.width() + e_odd.width();
    let relative_bound = numeric::pow10(GAP_CERTIFICATE_EXPONENT, digits);
    if certificate > relative_bound * &gap {
        return Err(Error::PrecisionExhausted(format!(
            "{digits} digits cannot resolve the level {} splitting to 1e{GAP_CERTIFICATE_EXPONENT} relative",
            level.n()
        )));
    }

    // Doublet integrity: both members adjacent in the merged spectrum and no
    // other level within one gap of the pair.
    let lo = if e_even.lo <= e_odd.lo {
        e_even.lo.clone()
    } else {
        e_odd.lo.clone()
    };
    let hi = if e_even.hi >= e_odd.hi {
        e_even.hi.clone()
    } else {
        e_odd.hi.clone()
    };
    let merged = |x: &Float| even_sturm.count(x) + odd_sturm.count(x);
    let below = merged(&lo);
    let through = merged(&hi);
    if below != lower_position || through != lower_position + 2 {
        return Err(Error::DoubletBroken(format!(
            "level {} of S = {spin} at B = {field}: pair members are not adjacent",
            level.n()
        )));
    }
    let margin = gap.clone();
    if merged(&(lo.clone() - &margin)) != below || merged(&(hi.clone() + &margin)) != through {
        return Err(Error::DoubletBroken(format!(
            "level {} of S = {spin} at B = {field}: splitting exceeds the distance to neighbouring levels",
            level.n()
        )));
    }

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert(
        "bisection_steps".to_string(),
        format!("{}+{}", e_even.steps, e_odd.steps),
    );
    diagnostics.insert(
        "certificate_rel_width".to_string(),
        numeric::format_float(&((e_even.width() + e_odd.width()) / &gap), 3),
    );
    diagnostics.insert(
        "block_dims".to_string(),
        format!("{}+{}", even.dim(), odd.dim()),
    );

    Ok(GapResult {
        spin,
        level,
        field: field.clone(),
        method: Method::Exact,
        anisotropy: kind,
        value: numeric::format_float(&gap, digits as usize),
        digits_used: digits,
        diagnostics,
        number: gap,
        exact: None,
    })
}
