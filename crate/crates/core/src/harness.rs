//! Method dispatch, field sweeps, structured output and power-law fits.
//!
//! Every number leaves this module as a decimal string at working precision;
//! gaps of order 1e-184 do not survive a trip through `f64`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::analytic;
use crate::bw;
use crate::domain::{
    required_digits, FieldValue, GapResult, LevelSpec, Method, PrecisionPolicy, SpinValue,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_parity_blocks, Anisotropy, Parity};
use crate::numeric::{self, Float};
use crate::spectrum;

pub const TOOL_NAME: &str = "spingap";

/// Significant digits used for relative deviations.
const REL_DEV_DIGITS: usize = 12;
/// Significant digits used for generated sweep fields.
const GRID_DIGITS: usize = 12;

/// Computes one gap. For the easy-plane Hamiltonian, level `n` counts doublets
/// from the bottom of its own (inverted) spectrum, so the closed forms are
/// evaluated at the mirrored easy-axis level.
pub fn compute_gap(
    spin: SpinValue,
    level: LevelSpec,
    field: &FieldValue,
    method: Method,
    kind: Anisotropy,
    policy: PrecisionPolicy,
) -> Result<GapResult> {
    if method == Method::Exact {
        return spectrum::exact_gap(spin, field, level, kind, policy);
    }
    let axis_level = match kind {
        Anisotropy::EasyAxis => level,
        Anisotropy::EasyPlane => level.mirrored(spin),
    };
    let mut result = match method {
        Method::Leading => analytic::leading_gap(spin, axis_level, field, policy)?,
        Method::Corrected => analytic::corrected_gap(spin, axis_level, field, policy)?,
        Method::Bw => bw::bw_gap(spin, axis_level, field, policy, None)?,
        Method::Exact => unreachable!(),
    };
    result.level = level;
    result.anisotropy = kind;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LevelSelection {
    All,
    List(Vec<u32>),
}

impl LevelSelection {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim() == "all" {
            return Ok(Self::All);
        }
        text.split(',')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidConfig(format!("level `{part}` is not an index")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::List)
    }

    pub fn resolve(&self, spin: SpinValue) -> Result<Vec<LevelSpec>> {
        match self {
            Self::All => Ok(LevelSpec::all(spin)),
            Self::List(ns) => ns.iter().map(|&n| LevelSpec::new(spin, n)).collect(),
        }
    }
}

impl fmt::Display for LevelSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::All => f.write_str("all"),
            Self::List(ns) => {
                let parts: Vec<String> = ns.iter().map(u32::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

pub fn parse_methods(text: &str) -> Result<Vec<Method>> {
    if text.trim() == "all" {
        return Ok(Method::ALL.to_vec());
    }
    let mut methods: Vec<Method> = text
        .split(',')
        .map(|m| m.trim().parse())
        .collect::<Result<_>>()?;
    methods.sort();
    methods.dedup();
    Ok(methods)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Linear,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(Self::Log),
            "linear" => Ok(Self::Linear),
            _ => Err(Error::InvalidConfig(format!("unknown spacing `{s}`"))),
        }
    }
}

impl fmt::Display for Spacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Log => "log",
            Self::Linear => "linear",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::InvalidConfig(format!("unknown format `{s}`"))),
        }
    }
}

/// Flag-name → value settings, from a config file and/or the command line.
pub type Settings = BTreeMap<String, String>;

/// Parses the line-oriented `key=value` config format. Blank lines and lines
/// starting with `#` are ignored; keys are CLI flag names without dashes.
pub fn parse_settings(text: &str) -> Result<Settings> {
    let mut settings = Settings::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
        })?;
        settings.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(settings)
}

fn setting<'a>(settings: &'a Settings, key: &str) -> Option<&'a str> {
    settings.get(key).map(String::as_str)
}

fn required<'a>(settings: &'a Settings, key: &str) -> Result<&'a str> {
    setting(settings, key).ok_or_else(|| Error::InvalidConfig(format!("missing `{key}`")))
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub spin: SpinValue,
    pub levels: LevelSelection,
    pub field_min: FieldValue,
    pub field_max: FieldValue,
    pub points: usize,
    pub spacing: Spacing,
    pub methods: Vec<Method>,
    pub anisotropy: Anisotropy,
    pub policy: PrecisionPolicy,
    pub format: OutputFormat,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidConfig(
                "a sweep needs at least 2 points".into(),
            ));
        }
        if !self.field_min.is_positive() {
            return Err(Error::InvalidConfig("field-min must be positive".into()));
        }
        if self.field_min.exact() >= self.field_max.exact() {
            return Err(Error::InvalidConfig(
                "field-min must be below field-max".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        self.levels.resolve(self.spin)?;
        Ok(())
    }

    /// Builds and validates a sweep config. `field-min`/`field-max` default to `field`.
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let config = Self::build(settings)?;
        config.validate()?;
        Ok(config)
    }

    /// Single-field config for method comparisons; `field` is required.
    pub fn compare_from_settings(settings: &Settings) -> Result<Self> {
        SpinValue::parse(required(settings, "spin")?)?;
        let field = required(settings, "field")?;
        let mut settings = settings.clone();
        settings.insert("field-min".into(), field.to_string());
        settings.insert("field-max".into(), field.to_string());
        settings.insert("points".into(), "1".into());
        let config = Self::build(&settings)?;
        if config.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        config.levels.resolve(config.spin)?;
        Ok(config)
    }

    fn build(settings: &Settings) -> Result<Self> {
        let spin = SpinValue::parse(required(settings, "spin")?)?;
        let single = setting(settings, "field");
        let field_min = setting(settings, "field-min")
            .or(single)
            .ok_or_else(|| Error::InvalidConfig("missing `field-min`".into()))?;
        let field_max = setting(settings, "field-max")
            .or(single)
            .ok_or_else(|| Error::InvalidConfig("missing `field-max`".into()))?;
        let points = match setting(settings, "points") {
            Some(p) => p
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("points `{p}` is not a count")))?,
            None => 2,
        };
        Ok(Self {
            spin,
            levels: LevelSelection::parse(setting(settings, "level").unwrap_or("0"))?,
            field_min: FieldValue::parse(field_min)?,
            field_max: FieldValue::parse(field_max)?,
            points,
            spacing: setting(settings, "spacing").unwrap_or("log").parse()?,
            methods: parse_methods(setting(settings, "method").unwrap_or("all"))?,
            anisotropy: setting(settings, "anisotropy")
                .unwrap_or("easy-axis")
                .parse()?,
            policy: PrecisionPolicy::parse(setting(settings, "precision").unwrap_or("auto"))?,
            format: setting(settings, "format").unwrap_or("csv").parse()?,
        })
    }

    /// Field grid, ascending. Endpoints are exact; interior points are rounded
    /// to 12 significant digits so every field stays an exact decimal.
    pub fn fields(&self) -> Vec<FieldValue> {
        const DIGITS: u32 = 40;
        let n = self.points;
        let lo = self.field_min.to_float(DIGITS);
        let hi = self.field_max.to_float(DIGITS);
        let steps = numeric::int_float((n - 1) as i64, DIGITS);
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.field_min.clone();
                }
                if i == n - 1 {
                    return self.field_max.clone();
                }
                let t = numeric::int_float(i as i64, DIGITS) / &steps;
                let value = match self.spacing {
                    Spacing::Linear => lo.clone() + (hi.clone() - &lo) * t,
                    Spacing::Log => {
                        let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
                        (ln_lo.clone() + (ln_hi - &ln_lo) * t).exp()
                    }
                };
                FieldValue::parse(&numeric::format_float(&value, GRID_DIGITS))
                    .expect("rendered decimal")
            })
            .collect()
    }

    /// Settings echo for output metadata.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let methods: Vec<&str> = self.methods.iter().map(|m| m.name()).collect();
        BTreeMap::from([
            ("spin", self.spin.to_string()),
            ("level", self.levels.to_string()),
            ("field-min", self.field_min.to_string()),
            ("field-max", self.field_max.to_string()),
            ("points", self.points.to_string()),
            ("spacing", self.spacing.to_string()),
            ("method", methods.join(",")),
            ("anisotropy", self.anisotropy.to_string()),
            ("precision", self.policy.to_string()),
        ])
    }
}

/// One `(level, field)` point with every requested method.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ComparisonRow {
    pub spin: String,
    pub n: u32,
    #[serde(rename = "B")]
    pub b: String,
    /// Gap per method; `None` when that method failed.
    pub gaps: BTreeMap<String, Option<String>>,
    /// `(method − exact)/exact` per non-exact method; empty unless exact was requested.
    pub rel_dev_vs_exact: BTreeMap<String, Option<String>>,
    /// `ok` or the error kind, per method.
    pub status: BTreeMap<String, String>,
    pub digits_used: u32,
    pub elapsed_ms: u64,
}

impl ComparisonRow {
    pub fn gap(&self, method: Method) -> Option<&str> {
        self.gaps.get(method.name()).and_then(|g| g.as_deref())
    }

    pub fn rel_dev(&self, method: Method) -> Option<&str> {
        self.rel_dev_vs_exact
            .get(method.name())
            .and_then(|g| g.as_deref())
    }
}

fn evaluate_row(config: &SweepConfig, level: LevelSpec, field: &FieldValue) -> ComparisonRow {
    let start = Instant::now();
    let outcomes: Vec<(Method, Result<GapResult>)> = config
        .methods
        .iter()
        .map(|&m| {
            (
                m,
                compute_gap(
                    config.spin,
                    level,
                    field,
                    m,
                    config.anisotropy,
                    config.policy,
                ),
            )
        })
        .collect();
    assemble_row(
        config,
        level,
        field,
        &outcomes,
        start.elapsed().as_millis() as u64,
    )
}

/// Collects per-method outcomes at one `(level, field)` into a row.
pub fn assemble_row(
    config: &SweepConfig,
    level: LevelSpec,
    field: &FieldValue,
    outcomes: &[(Method, Result<GapResult>)],
    elapsed_ms: u64,
) -> ComparisonRow {
    let axis_level = match config.anisotropy {
        Anisotropy::EasyAxis => level,
        Anisotropy::EasyPlane => level.mirrored(config.spin),
    };
    let digits = required_digits(config.spin, field, axis_level, config.policy);
    let exact: Option<Float> = outcomes.iter().find_map(|(m, r)| match (m, r) {
        (Method::Exact, Ok(g)) => Some(g.number.clone()),
        _ => None,
    });
    let has_exact = outcomes.iter().any(|(m, _)| *m == Method::Exact);

    let mut gaps = BTreeMap::new();
    let mut rel_dev = BTreeMap::new();
    let mut status = BTreeMap::new();
    for (method, outcome) in outcomes {
        let name = method.name().to_string();
        match outcome {
            Ok(g) => {
                gaps.insert(name.clone(), Some(g.value.clone()));
                status.insert(name.clone(), "ok".to_string());
            }
            Err(e) => {
                gaps.insert(name.clone(), None);
                status.insert(name.clone(), e.kind().to_string());
            }
        }
        if has_exact && *method != Method::Exact {
            let dev = match (outcome, &exact) {
                (Ok(g), Some(x)) => {
                    let d = (g.number.clone() - x) / x;
                    Some(numeric::format_float(&d, REL_DEV_DIGITS))
                }
                _ => None,
            };
            rel_dev.insert(name, dev);
        }
    }
    ComparisonRow {
        spin: config.spin.to_string(),
        n: level.n(),
        b: field.to_string(),
        gaps,
        rel_dev_vs_exact: rel_dev,
        status,
        digits_used: digits,
        elapsed_ms,
    }
}

/// Rows in level-major, field-ascending order. Per-method failures are
/// recorded in the row rather than aborting the sweep.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ComparisonRow>> {
    config.validate()?;
    let levels = config.levels.resolve(config.spin)?;
    let fields = config.fields();
    let jobs: Vec<(LevelSpec, FieldValue)> = levels
        .iter()
        .flat_map(|&l| fields.iter().map(move |b| (l, b.clone())))
        .collect();
    Ok(evaluate_all(config, &jobs))
}

/// One row per level at `field_min`, every configured method.
pub fn run_compare(config: &SweepConfig) -> Result<Vec<ComparisonRow>> {
    let jobs: Vec<(LevelSpec, FieldValue)> = config
        .levels
        .resolve(config.spin)?
        .into_iter()
        .map(|l| (l, config.field_min.clone()))
        .collect();
    Ok(evaluate_all(config, &jobs))
}

#[cfg(feature = "parallel")]
fn evaluate_all(config: &SweepConfig, jobs: &[(LevelSpec, FieldValue)]) -> Vec<ComparisonRow> {
    use rayon::prelude::*;
    jobs.par_iter()
        .map(|(l, b)| evaluate_row(config, *l, b))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_all(config: &SweepConfig, jobs: &[(LevelSpec, FieldValue)]) -> Vec<ComparisonRow> {
    jobs.iter()
        .map(|(l, b)| evaluate_row(config, *l, b))
        .collect()
}

pub const CSV_HEADER: [&str; 9] = [
    "spin",
    "n",
    "B",
    "method",
    "gap",
    "rel_dev_vs_exact",
    "digits",
    "status",
    "elapsed_ms",
];

/// Long-format CSV: one line per `(row, method)`.
pub fn render_csv(rows: &[ComparisonRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    writer.write_record(CSV_HEADER).map_err(io)?;
    for row in rows {
        for (method, gap) in &row.gaps {
            let dev = row
                .rel_dev_vs_exact
                .get(method)
                .cloned()
                .flatten()
                .unwrap_or_default();
            writer
                .write_record([
                    row.spin.as_str(),
                    &row.n.to_string(),
                    &row.b,
                    method,
                    gap.as_deref().unwrap_or(""),
                    &dev,
                    &row.digits_used.to_string(),
                    &row.status[method],
                    &row.elapsed_ms.to_string(),
                ])
                .map_err(io)?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

#[derive(Serialize)]
struct JsonMeta<'a> {
    tool: &'a str,
    version: &'a str,
    config: BTreeMap<&'static str, String>,
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    meta: JsonMeta<'a>,
    rows: &'a [ComparisonRow],
}

pub fn render_json(rows: &[ComparisonRow], config: &SweepConfig) -> String {
    let doc = JsonDocument {
        meta: JsonMeta {
            tool: TOOL_NAME,
            version: env!("CARGO_PKG_VERSION"),
            config: config.echo(),
        },
        rows,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable rows");
    text.push('\n');
    text
}

/// Reads rows back from the long-format CSV.
pub fn parse_csv(text: &str) -> Result<Vec<ComparisonRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Io(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::InvalidConfig("unexpected CSV header".into()));
    }
    let mut rows: Vec<ComparisonRow> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Io(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let n: u32 = field(1)
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad level `{}`", field(1))))?;
        let key = (field(0), n, field(2));
        let same = rows
            .last()
            .is_some_and(|r| (r.spin.clone(), r.n, r.b.clone()) == key);
        if !same {
            rows.push(ComparisonRow {
                spin: key.0,
                n,
                b: key.2,
                gaps: BTreeMap::new(),
                rel_dev_vs_exact: BTreeMap::new(),
                status: BTreeMap::new(),
                digits_used: field(6).parse().unwrap_or(0),
                elapsed_ms: field(8).parse().unwrap_or(0),
            });
        }
        let row = rows.last_mut().expect("row pushed");
        let method = field(3);
        let nonempty = |s: String| (!s.is_empty()).then_some(s);
        row.gaps.insert(method.clone(), nonempty(field(4)));
        row.rel_dev_vs_exact
            .insert(method.clone(), nonempty(field(5)));
        row.status.insert(method, field(7));
    }
    // Deviation cells exist exactly when exact was among the methods.
    for row in &mut rows {
        if row.gaps.contains_key("exact") {
            row.rel_dev_vs_exact.remove("exact");
        } else {
            row.rel_dev_vs_exact.clear();
        }
    }
    Ok(rows)
}

/// Which quantity of a row to fit against `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitColumn {
    Gap(Method),
    /// `|method/exact − 1|`
    Residual(Method),
}

impl FitColumn {
    fn value<'a>(&self, row: &'a ComparisonRow) -> Option<&'a str> {
        match self {
            FitColumn::Gap(m) => row.gap(*m),
            FitColumn::Residual(m) => row.rel_dev(*m).map(|d| d.trim_start_matches('-')),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
}

/// Least-squares fit of `log10(value)` against `log10(B)`.
pub fn fit_exponent(rows: &[ComparisonRow], column: FitColumn) -> Result<FitResult> {
    let points = rows
        .iter()
        .map(|row| {
            let raw = column
                .value(row)
                .ok_or_else(|| Error::DegenerateFit(format!("missing value at B = {}", row.b)))?;
            let y = numeric::log10_of_decimal(raw).ok_or_else(|| {
                Error::DegenerateFit(format!("non-positive value `{raw}` at B = {}", row.b))
            })?;
            let x = numeric::log10_of_decimal(&row.b)
                .ok_or_else(|| Error::DegenerateFit(format!("non-positive field {}", row.b)))?;
            Ok((x, y))
        })
        .collect::<Result<Vec<_>>>()?;
    fit_log_points(&points)
}

/// Ordinary least squares on `(log10 B, log10 value)` pairs.
pub fn fit_log_points(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all fields are equal".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rms = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(FitResult {
        slope,
        intercept,
        rms,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub index: usize,
    pub energy: String,
    pub parity: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DoubletPair {
    pub n: u32,
    /// Indices of the two members in the sorted spectrum.
    pub members: [usize; 2],
    pub splitting: String,
    pub adjacent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub spin: String,
    #[serde(rename = "B")]
    pub b: String,
    pub anisotropy: String,
    pub digits: u32,
    pub levels: Vec<SpectrumRow>,
    pub doublets: Vec<DoubletPair>,
    /// Unpaired level (`m = 0` of an integer spin), if any.
    pub singlet: Option<usize>,
    #[serde(skip)]
    pub energies: Vec<Float>,
}

/// Renders `value` with only the digits that survive an absolute error of `width`.
fn resolved(value: &Float, width: &Float, digits: u32) -> String {
    let log10 =
        |x: &Float| numeric::log10_of_decimal(&numeric::format_float(&numeric::abs_float(x), 20));
    let sig = match (log10(value), log10(width)) {
        (Some(v), Some(w)) => ((v - w).floor() as i64).clamp(1, i64::from(digits)) as usize,
        _ => 1,
    };
    numeric::format_float(value, sig)
}

/// Sorted spectrum with parity labels and the doublet pairing.
pub fn run_spectrum(
    spin: SpinValue,
    field: &FieldValue,
    kind: Anisotropy,
    policy: PrecisionPolicy,
) -> Result<SpectrumReport> {
    let digits = if field.is_zero() {
        policy.digits.max(PrecisionPolicy::FLOOR_DIGITS)
    } else {
        required_digits(spin, field, LevelSpec::ground(spin), policy)
    };
    let (even, odd) = build_parity_blocks(spin, field, kind, digits);
    let scale = numeric::int_float(i64::from(spin.twice() * spin.twice()) + 1, digits)
        + numeric::abs_float(&field.to_float(digits))
            * numeric::int_float(i64::from(spin.twice()) + 2, digits);
    let width = numeric::pow10(6 - i64::from(digits), digits) * scale;
    let set = spectrum::eigenvalues_blockwise(&even, &odd, &width)?;
    let labels = set.parity_labels.clone().expect("blockwise labels");

    let ranks = |p: Parity| -> Vec<usize> {
        labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == p)
            .map(|(i, _)| i)
            .collect()
    };
    let (evens, odds) = (ranks(Parity::Even), ranks(Parity::Odd));
    let count = spin.doublet_count() as usize;
    let mut doublets = Vec::with_capacity(count);
    for n in 0..count {
        let (a, b) = match kind {
            Anisotropy::EasyAxis => (evens[n], odds[n]),
            Anisotropy::EasyPlane => {
                let from_top = count - 1 - n;
                (
                    evens[evens.len() - 1 - from_top],
                    odds[odds.len() - 1 - from_top],
                )
            }
        };
        let (lo, hi) = (a.min(b), a.max(b));
        let split = numeric::abs_float(&(set.values[hi].clone() - &set.values[lo]));
        doublets.push(DoubletPair {
            n: n as u32,
            members: [lo, hi],
            splitting: resolved(&split, &width, digits),
            adjacent: hi == lo + 1,
        });
    }
    let paired: Vec<usize> = doublets.iter().flat_map(|d| d.members).collect();
    let singlet = (0..set.len()).find(|i| !paired.contains(i));

    Ok(SpectrumReport {
        spin: spin.to_string(),
        b: field.to_string(),
        anisotropy: kind.to_string(),
        digits,
        levels: set
            .values
            .iter()
            .zip(&labels)
            .enumerate()
            .map(|(index, (v, p))| SpectrumRow {
                index,
                energy: resolved(v, &width, digits),
                parity: p.to_string(),
            })
            .collect(),
        doublets,
        singlet,
        energies: set.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> Settings {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn config_file_format() {
        let text = "# sweep\nspin = 2\n\nfield-min=0.001\nfield-max = 0.1\npoints=5\n";
        let s = parse_settings(text).unwrap();
        assert_eq!(s["spin"], "2");
        assert_eq!(s["field-max"], "0.1");
        assert!(parse_settings("spin 2").is_err());
    }

    #[test]
    fn sweep_validation() {
        let base = [("spin", "1"), ("field-min", "0.1"), ("field-max", "0.2")];
        let mut s = settings(&base);
        s.insert("points".into(), "1".into());
        assert!(matches!(
            SweepConfig::from_settings(&s),
            Err(Error::InvalidConfig(_))
        ));
        let mut s = settings(&base);
        s.insert("field-min".into(), "0.3".into());
        assert!(SweepConfig::from_settings(&s).is_err());
        let mut s = settings(&base);
        s.insert("field-min".into(), "-0.1".into());
        assert!(SweepConfig::from_settings(&s).is_err());
        let mut s = settings(&base);
        s.insert("level".into(), "1".into());
        assert!(matches!(
            SweepConfig::from_settings(&s),
            Err(Error::InvalidLevel(_))
        ));
        assert!(SweepConfig::from_settings(&settings(&base)).is_ok());
    }

    #[test]
    fn log_grid() {
        let s = settings(&[
            ("spin", "1"),
            ("field-min", "0.001"),
            ("field-max", "0.1"),
            ("points", "3"),
        ]);
        let config = SweepConfig::from_settings(&s).unwrap();
        let fields: Vec<String> = config.fields().iter().map(|f| f.to_string()).collect();
        assert_eq!(fields, ["0.001", "0.01", "0.1"]);
    }

    #[test]
    fn linear_grid() {
        let s = settings(&[
            ("spin", "1"),
            ("field-min", "0.1"),
            ("field-max", "0.2"),
            ("points", "4"),
            ("spacing", "linear"),
        ]);
        let config = SweepConfig::from_settings(&s).unwrap();
        let fields: Vec<String> = config.fields().iter().map(|f| f.to_string()).collect();
        assert_eq!(fields, ["0.1", "0.133333333333", "0.166666666667", "0.2"]);
    }

    #[test]
    fn method_and_level_lists() {
        assert_eq!(
            parse_methods("bw,exact").unwrap(),
            vec![Method::Exact, Method::Bw]
        );
        assert_eq!(parse_methods("all").unwrap().len(), 4);
        assert!(parse_methods("fast").is_err());
        assert_eq!(
            LevelSelection::parse("0,2").unwrap(),
            LevelSelection::List(vec![0, 2])
        );
        assert!(LevelSelection::parse("x").is_err());
    }

    #[test]
    fn fit_exact_power_law() {
        let points: Vec<(f64, f64)> = [1e-3f64, 1e-2, 1e-1]
            .iter()
            .map(|b| (b.log10(), 4.0 * b.log10()))
            .collect();
        let fit = fit_log_points(&points).unwrap();
        assert!((fit.slope - 4.0).abs() < 1e-6);
        assert!(fit.rms < 1e-9);
        assert!(matches!(
            fit_log_points(&points[..2]),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn row_errors_are_recorded() {
        let s = settings(&[
            ("spin", "2"),
            ("field-min", "0.01"),
            ("field-max", "6"),
            ("points", "2"),
            ("method", "exact,bw"),
        ]);
        let rows = run_sweep(&SweepConfig::from_settings(&s).unwrap()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].status["bw"], "ok");
        assert_eq!(rows[1].status["bw"], "BracketFailure");
        assert_eq!(rows[1].gap(Method::Bw), None);
    }
}
