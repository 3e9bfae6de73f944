//! Browser bindings. Every export takes plain strings and numbers and returns
//! a JSON document; failures come back as `{"error": kind, "message": ...}`.

use serde::Serialize;
use spingap::harness::{self, LevelSelection, OutputFormat, Spacing, SweepConfig};
use spingap::{Anisotropy, FieldValue, PrecisionPolicy, Result, SpinValue};
use wasm_bindgen::prelude::*;

fn respond<T: Serialize>(outcome: Result<T>) -> String {
    match outcome {
        Ok(value) => serde_json::to_string(&value).expect("serializable"),
        Err(e) => serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string(),
    }
}

/// Gap of one doublet against B on a log grid, for the comma-separated `methods`.
#[wasm_bindgen(js_name = gapCurves)]
pub fn gap_curves(
    spin: &str,
    level: u32,
    field_min: &str,
    field_max: &str,
    points: usize,
    methods: &str,
) -> String {
    respond(gap_curves_rows(
        spin, level, field_min, field_max, points, methods,
    ))
}

pub fn gap_curves_rows(
    spin: &str,
    level: u32,
    field_min: &str,
    field_max: &str,
    points: usize,
    methods: &str,
) -> Result<Vec<harness::ComparisonRow>> {
    let config = SweepConfig {
        spin: SpinValue::parse(spin)?,
        levels: LevelSelection::List(vec![level]),
        field_min: FieldValue::parse(field_min)?,
        field_max: FieldValue::parse(field_max)?,
        points,
        spacing: Spacing::Log,
        methods: harness::parse_methods(methods)?,
        anisotropy: Anisotropy::EasyAxis,
        policy: PrecisionPolicy::auto(),
        format: OutputFormat::Json,
    };
    harness::run_sweep(&config)
}

/// Sorted spectrum with parity labels and doublet pairing.
#[wasm_bindgen]
pub fn spectrum(spin: &str, field: &str, anisotropy: &str) -> String {
    respond(spectrum_report(spin, field, anisotropy))
}

pub fn spectrum_report(
    spin: &str,
    field: &str,
    anisotropy: &str,
) -> Result<harness::SpectrumReport> {
    let kind: Anisotropy = anisotropy.parse()?;
    harness::run_spectrum(
        SpinValue::parse(spin)?,
        &FieldValue::parse(field)?,
        kind,
        PrecisionPolicy::auto(),
    )
}

#[derive(Debug, Serialize)]
pub struct LevelFan {
    pub fields: Vec<String>,
    /// `energies[i][k]`: k-th level at `fields[i]`.
    pub energies: Vec<Vec<String>>,
    pub parities: Vec<Vec<String>>,
}

/// Every level on a linear grid from B = 0 to `field_max`.
#[wasm_bindgen(js_name = levelFan)]
pub fn level_fan(spin: &str, field_max: &str, points: usize, anisotropy: &str) -> String {
    respond(level_fan_data(spin, field_max, points, anisotropy))
}

pub fn level_fan_data(
    spin: &str,
    field_max: &str,
    points: usize,
    anisotropy: &str,
) -> Result<LevelFan> {
    let spin = SpinValue::parse(spin)?;
    let kind: Anisotropy = anisotropy.parse()?;
    let top = FieldValue::parse(field_max)?;
    if points < 2 || !top.is_positive() {
        return Err(spingap::Error::InvalidConfig(
            "need points >= 2 and a positive field".into(),
        ));
    }
    let policy = PrecisionPolicy::fixed(PrecisionPolicy::FLOOR_DIGITS);
    let mut fan = LevelFan {
        fields: Vec::new(),
        energies: Vec::new(),
        parities: Vec::new(),
    };
    for i in 0..points {
        let fraction = spingap::numeric::parse_decimal(&i.to_string()).expect("integer")
            / spingap::numeric::parse_decimal(&(points - 1).to_string()).expect("integer");
        let field = FieldValue::parse(&spingap::numeric::format_rational(
            &(top.exact().clone() * fraction),
            12,
        ))?;
        let report = harness::run_spectrum(spin, &field, kind, policy)?;
        fan.fields.push(field.to_string());
        fan.energies
            .push(report.levels.iter().map(|l| l.energy.clone()).collect());
        fan.parities
            .push(report.levels.iter().map(|l| l.parity.clone()).collect());
    }
    Ok(fan)
}
