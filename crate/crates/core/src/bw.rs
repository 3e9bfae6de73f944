//! Resummed Brillouin–Wigner secular equation for a tunnelling doublet.
//!
//! Summing the geometric series of paths that shuttle between `σ` and `−σ`
//! turns the perturbation series into
//!
//! ```text
//! E − ε_σ − Σ_{m = σ±1} V²_{σ,m} / (E − ε_m) = ± g_σ(E)
//! g_σ(E) = Π_{k=0}^{2σ−1} V_{σ−k, σ−k−1} / Π_{k=1}^{2σ−1} (E − ε_{σ−k})
//! ```
//!
//! with `ε_m = −m²`. The two signs give the two members of the doublet, so
//! their difference is the splitting. The left-hand side keeps only the
//! second-order neighbour terms; the neighbour `m = −σ` (the degenerate
//! partner, reachable only when `σ = 1/2`) is already inside `g_σ`.

use std::collections::BTreeMap;

use crate::domain::{
    required_digits, FieldValue, GapResult, LevelSpec, Method, PrecisionPolicy, SpinValue,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{sx_offdiag, Anisotropy};
use crate::numeric::{self, Float};

pub const DEFAULT_ITERATION_CAP: usize = 10_000;
const FIXED_POINT_BUDGET: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn apply(self, value: Float) -> Float {
        match self {
            Branch::Plus => value,
            Branch::Minus => -value,
        }
    }
}

/// Truncated secular equation for one doublet at fixed working precision.
#[derive(Debug, Clone)]
pub struct BwEquation {
    pub spin: SpinValue,
    pub level: LevelSpec,
    pub field: FieldValue,
    /// Perturbative order retained on the left-hand side.
    pub truncation: u32,
    pub digits: u32,
    epsilon_sigma: Float,
    /// `(V², ε_m)` for each retained neighbour.
    neighbours: Vec<(Float, Float)>,
    /// Product of the `2σ` matrix elements along the path `σ → −σ`.
    path_product: Float,
    /// `ε_{σ−k}` for `k = 1..2σ−1`.
    path_levels: Vec<Float>,
    max_iterations: usize,
}

fn level_energy(m_twice: i64, digits: u32) -> Float {
    let value = Float::from_parts((-(m_twice * m_twice)).into(), -2);
    value
        .with_precision(numeric::bits_for_digits(digits))
        .value()
}

impl BwEquation {
    pub fn new(spin: SpinValue, level: LevelSpec, field: &FieldValue, digits: u32) -> Result<Self> {
        if level.n() >= spin.doublet_count() || level.sigma_twice() + 2 * level.n() != spin.twice()
        {
            return Err(Error::InvalidLevel(format!(
                "level {} does not belong to S = {spin}",
                level.n()
            )));
        }
        field.require_nonzero()?;
        let t = i64::from(spin.twice());
        let sigma = i64::from(level.sigma_twice());
        let b = field.to_float(digits);
        // V_{m, m−1} = −B·⟨m−1|S_x|m⟩
        let coupling =
            |m_twice: i64| -(b.clone() * sx_offdiag(spin, m_twice, digits).expect("in range"));

        let mut neighbours = Vec::new();
        if sigma - 2 != -sigma {
            let v = coupling(sigma);
            neighbours.push((v.clone() * &v, level_energy(sigma - 2, digits)));
        }
        if sigma + 2 <= t {
            let v = coupling(sigma + 2);
            neighbours.push((v.clone() * &v, level_energy(sigma + 2, digits)));
        }

        let path_product = (0..sigma)
            .map(|k| coupling(sigma - 2 * k))
            .fold(numeric::int_float(1, digits), |acc, v| acc * v);
        let path_levels = (1..sigma)
            .map(|k| level_energy(sigma - 2 * k, digits))
            .collect();

        Ok(Self {
            spin,
            level,
            field: field.clone(),
            truncation: 2,
            digits,
            epsilon_sigma: level_energy(sigma, digits),
            neighbours,
            path_product,
            path_levels,
            max_iterations: DEFAULT_ITERATION_CAP,
        })
    }

    pub fn with_iteration_cap(mut self, cap: usize) -> Self {
        self.max_iterations = cap;
        self
    }

    pub fn epsilon_sigma(&self) -> &Float {
        &self.epsilon_sigma
    }

    /// `Σ_m V²_{σ,m} / (E − ε_m)` over the retained neighbours.
    pub fn level_shift(&self, energy: &Float) -> Float {
        self.neighbours
            .iter()
            .fold(numeric::int_float(0, self.digits), |acc, (v_sq, eps)| {
                acc + v_sq.clone() / (energy.clone() - eps)
            })
    }

    /// Tunnelling amplitude `g_σ(E)`.
    pub fn amplitude(&self, energy: &Float) -> Float {
        let denominator = self
            .path_levels
            .iter()
            .fold(numeric::int_float(1, self.digits), |acc, eps| {
                acc * (energy.clone() - eps)
            });
        self.path_product.clone() / denominator
    }

    /// `L(E) ∓ g_σ(E)`; zero at a solution of the chosen branch.
    pub fn residual(&self, energy: &Float, branch: Branch) -> Float {
        energy.clone()
            - &self.epsilon_sigma
            - self.level_shift(energy)
            - branch.apply(self.amplitude(energy))
    }

    /// Nearest poles of the equation below and above `ε_σ`; the fixed point
    /// may roam freely between them.
    fn pole_window(&self) -> (Option<Float>, Option<Float>) {
        let poles = self
            .neighbours
            .iter()
            .map(|(_, eps)| eps)
            .chain(&self.path_levels);
        let mut below: Option<Float> = None;
        let mut above: Option<Float> = None;
        for pole in poles {
            if *pole < self.epsilon_sigma {
                if below.as_ref().is_none_or(|b| pole > b) {
                    below = Some(pole.clone());
                }
            } else if *pole > self.epsilon_sigma && above.as_ref().is_none_or(|a| pole < a) {
                above = Some(pole.clone());
            }
        }
        (below, above)
    }

    fn map(&self, energy: &Float, branch: Branch) -> Float {
        self.epsilon_sigma.clone() + self.level_shift(energy) + branch.apply(self.amplitude(energy))
    }

    fn bracket(&self) -> (Float, Float) {
        let half = Float::from_parts(1.into(), -1)
            .with_precision(numeric::bits_for_digits(self.digits))
            .value();
        (
            self.epsilon_sigma.clone() - &half,
            self.epsilon_sigma.clone() + half,
        )
    }
}

#[derive(Debug, Clone)]
pub struct BranchSolution {
    pub energy: Float,
    pub iterations: usize,
    pub bisection: bool,
}

fn converged(previous: &Float, next: &Float, tol: &Float) -> bool {
    let one = Float::from(1);
    let scale = numeric::max_float(numeric::abs_float(next), one);
    numeric::abs_float(&(next.clone() - previous)) <= tol.clone() * scale
}

/// Solves one branch by damped fixed-point iteration, which may range over
/// the pole-free window around `ε_σ`, with a bisection fallback on
/// `(ε_σ − 1/2, ε_σ + 1/2)`.
pub fn solve_branch(eq: &BwEquation, branch: Branch, tol: &Float) -> Result<BranchSolution> {
    let floor = numeric::pow10(5 - i64::from(eq.digits), eq.digits);
    if *tol < floor {
        return Err(Error::PrecisionExhausted(format!(
            "tolerance below 10^(5 − {}) is not resolvable",
            eq.digits
        )));
    }
    let (lo, hi) = eq.bracket();
    let (pole_below, pole_above) = eq.pole_window();
    let two = numeric::int_float(2, eq.digits);

    let mut energy = eq.epsilon_sigma.clone();
    let mut damping = numeric::int_float(1, eq.digits);
    let mut last_step: Option<Float> = None;
    let budget = FIXED_POINT_BUDGET.min(eq.max_iterations);
    for iteration in 1..=budget {
        let target = eq.map(&energy, branch);
        let step = target - &energy;
        let step_size = numeric::abs_float(&step);
        if let Some(previous) = &last_step {
            if step_size > *previous {
                damping /= &two;
            }
        }
        let next = energy.clone() + damping.clone() * &step;
        let escaped = pole_below.as_ref().is_some_and(|p| next <= *p)
            || pole_above.as_ref().is_some_and(|p| next >= *p);
        if escaped {
            break;
        }
        if converged(&energy, &next, tol) {
            return Ok(BranchSolution {
                energy: next,
                iterations: iteration,
                bisection: false,
            });
        }
        last_step = Some(step_size);
        energy = next;
    }

    let (mut lo, mut hi) = (lo, hi);
    let f_lo = eq.residual(&lo, branch);
    let f_hi = eq.residual(&hi, branch);
    if (f_lo < Float::ZERO) == (f_hi < Float::ZERO) {
        return Err(Error::BracketFailure(
            numeric::format_float(&lo, 12),
            numeric::format_float(&hi, 12),
        ));
    }
    let lo_negative = f_lo < Float::ZERO;
    let mut iterations = budget;
    loop {
        let mid = (lo.clone() + &hi) / &two;
        if converged(&lo, &hi, tol) {
            return Ok(BranchSolution {
                energy: mid,
                iterations,
                bisection: true,
            });
        }
        iterations += 1;
        if iterations > eq.max_iterations {
            return Err(Error::NoConvergence(eq.max_iterations));
        }
        if (eq.residual(&mid, branch) < Float::ZERO) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn solve_both(eq: &BwEquation, tol: &Float) -> (Result<BranchSolution>, Result<BranchSolution>) {
    #[cfg(feature = "parallel")]
    {
        rayon::join(
            || solve_branch(eq, Branch::Plus, tol),
            || solve_branch(eq, Branch::Minus, tol),
        )
    }
    #[cfg(not(feature = "parallel"))]
    {
        (
            solve_branch(eq, Branch::Plus, tol),
            solve_branch(eq, Branch::Minus, tol),
        )
    }
}

/// Splitting `|E₊ − E₋|` of the resummed equation.
///
/// Without an explicit `tol` the solver uses `10^(10 − digits)`, which keeps
/// about ten significant digits of the gap at the auto precision.
pub fn bw_gap(
    spin: SpinValue,
    level: LevelSpec,
    field: &FieldValue,
    policy: PrecisionPolicy,
    tol: Option<&Float>,
) -> Result<GapResult> {
    let digits = required_digits(spin, field, level, policy);
    let eq = BwEquation::new(spin, level, field, digits)?;
    let default_tol = numeric::pow10(10 - i64::from(digits), digits);
    let tol = tol.unwrap_or(&default_tol);
    let (plus, minus) = solve_both(&eq, tol);
    let (plus, minus) = (plus?, minus?);
    let gap = numeric::abs_float(&(plus.energy.clone() - &minus.energy));

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("iterations_plus".to_string(), plus.iterations.to_string());
    diagnostics.insert("iterations_minus".to_string(), minus.iterations.to_string());
    if plus.bisection || minus.bisection {
        diagnostics.insert("bisection_fallback".to_string(), "true".to_string());
    }
    diagnostics.insert("tolerance".to_string(), numeric::format_float(tol, 3));

    Ok(GapResult {
        spin,
        level,
        field: field.clone(),
        method: Method::Bw,
        anisotropy: Anisotropy::EasyAxis,
        value: numeric::format_float(&gap, digits as usize),
        digits_used: digits,
        diagnostics,
        number: gap,
        exact: None,
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

    fn to_f64(x: &Float) -> f64 {
        numeric::format_float(x, 25).parse().unwrap()
    }

    fn tol(digits: u32, exponent: i64) -> Float {
        numeric::pow10(exponent, digits)
    }

    #[test]
    fn spin_one_minus_branch_is_exactly_minus_one() {
        let s = spin("1");
        let eq = BwEquation::new(s, LevelSpec::ground(s), &field("0.3"), 50).unwrap();
        let sol = solve_branch(&eq, Branch::Minus, &tol(50, -40)).unwrap();
        assert_eq!(numeric::format_float(&sol.energy, 45), "-1");
    }

    #[test]
    fn spin_one_plus_branch_is_ground_state() {
        let s = spin("1");
        let b = 0.3f64;
        let eq = BwEquation::new(s, LevelSpec::ground(s), &field("0.3"), 50).unwrap();
        let sol = solve_branch(&eq, Branch::Plus, &tol(50, -40)).unwrap();
        let expected = (-1.0 - (1.0 + 4.0 * b * b).sqrt()) / 2.0;
        assert!((to_f64(&sol.energy) - expected).abs() < 1e-14);
    }

    #[test]
    fn spin_half_branches() {
        let s = spin("1/2");
        let eq = BwEquation::new(s, LevelSpec::ground(s), &field("0.2"), 50).unwrap();
        let plus = solve_branch(&eq, Branch::Plus, &tol(50, -40)).unwrap();
        let minus = solve_branch(&eq, Branch::Minus, &tol(50, -40)).unwrap();
        // V_{1/2,−1/2} = −B/2, so the plus branch sits at −1/4 − B/2.
        assert_eq!(numeric::format_float(&plus.energy, 40), "-0.35");
        assert_eq!(numeric::format_float(&minus.energy, 40), "-0.15");
    }

    #[test]
    fn gap_small_spins() {
        let s = spin("1");
        let g = bw_gap(
            s,
            LevelSpec::ground(s),
            &field("0.1"),
            PrecisionPolicy::auto(),
            None,
        )
        .unwrap();
        let expected = (-1.0 + 1.04f64.sqrt()) / 2.0;
        assert!((to_f64(&g.number) - expected).abs() < 1e-15);
        assert!(g.diagnostic("iterations_plus").is_some());
        let s = spin("1/2");
        let g = bw_gap(
            s,
            LevelSpec::ground(s),
            &field("0.37"),
            PrecisionPolicy::auto(),
            None,
        )
        .unwrap();
        assert_eq!(numeric::format_float(&g.number, 30), "0.37");
    }

    #[test]
    fn tolerance_floor() {
        let s = spin("2");
        let eq = BwEquation::new(s, LevelSpec::ground(s), &field("0.1"), 40).unwrap();
        assert!(matches!(
            solve_branch(&eq, Branch::Plus, &tol(40, -38)),
            Err(Error::PrecisionExhausted(_))
        ));
    }

    #[test]
    fn iteration_cap() {
        let s = spin("3");
        let eq = BwEquation::new(s, LevelSpec::ground(s), &field("0.01"), 60)
            .unwrap()
            .with_iteration_cap(1);
        assert!(matches!(
            solve_branch(&eq, Branch::Plus, &tol(60, -50)),
            Err(Error::NoConvergence(1))
        ));
    }

    #[test]
    fn large_field_fails_bracket() {
        let s = spin("2");
        let r = bw_gap(
            s,
            LevelSpec::ground(s),
            &field("6"),
            PrecisionPolicy::auto(),
            None,
        );
        assert!(matches!(r, Err(Error::BracketFailure(..))), "{r:?}");
    }

    #[test]
    fn rejects_zero_field() {
        let s = spin("2");
        assert!(BwEquation::new(s, LevelSpec::ground(s), &field("0"), 40).is_err());
    }
}
