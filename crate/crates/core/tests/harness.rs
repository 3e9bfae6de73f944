use dashu::base::Abs;
use dashu::rational::RBig;
use serde_json::Value;
use spingap::harness::{
    fit_exponent, parse_csv, parse_settings, render_csv, render_json, run_compare, run_spectrum,
    run_sweep, ComparisonRow, FitColumn, Settings, SweepConfig, CSV_HEADER,
};
use spingap::numeric::parse_decimal;
use spingap::{Anisotropy, Error, FieldValue, Method, PrecisionPolicy, SpinValue};

fn config(text: &str) -> SweepConfig {
    SweepConfig::from_settings(&parse_settings(text).unwrap()).unwrap()
}

fn strip_timing(rows: &[ComparisonRow]) -> Vec<ComparisonRow> {
    rows.iter()
        .cloned()
        .map(|r| ComparisonRow { elapsed_ms: 0, ..r })
        .collect()
}

#[test]
fn spin_one_sweep_example() {
    let rows = run_sweep(&config(
        "spin=1\nfield-min=0.1\nfield-max=0.2\npoints=2\nmethod=exact",
    ))
    .unwrap();
    let gaps: Vec<&str> = rows.iter().map(|r| r.gap(Method::Exact).unwrap()).collect();
    assert!(gaps[0].starts_with("0.00990195135927848300282241090227819"));
    assert!(gaps[1].starts_with("0.0385164807134504031250710491540329"));
    assert!(rows.iter().all(|r| r.rel_dev_vs_exact.is_empty()));
}

#[test]
fn spin_half_exact_column_is_the_field() {
    let rows = run_sweep(&config(
        "spin=1/2\nfield-min=0.001\nfield-max=0.5\npoints=6\nmethod=exact,corrected",
    ))
    .unwrap();
    for row in &rows {
        let gap = parse_decimal(row.gap(Method::Exact).unwrap()).unwrap();
        let b = parse_decimal(&row.b).unwrap();
        let tolerance = b.clone() / RBig::from(10u64.pow(10));
        assert!((gap - &b).abs() <= tolerance, "B = {}", row.b);
        assert_eq!(row.gap(Method::Corrected).unwrap(), row.b);
        let dev: f64 = row.rel_dev(Method::Corrected).unwrap().parse().unwrap();
        assert!(dev.abs() < 1e-30, "B = {}: {dev}", row.b);
    }
}

#[test]
fn rows_are_level_major_and_field_ascending() {
    let rows = run_sweep(&config(
        "spin=3\nlevel=all\nfield-min=0.01\nfield-max=0.1\npoints=3\nmethod=leading",
    ))
    .unwrap();
    let keys: Vec<(u32, String)> = rows.iter().map(|r| (r.n, r.b.clone())).collect();
    let fields = ["0.01", "0.0316227766017", "0.1"];
    let expected: Vec<(u32, String)> = (0..3)
        .flat_map(|n| fields.iter().map(move |b| (n, b.to_string())))
        .collect();
    assert_eq!(keys, expected);
}

#[test]
fn csv_and_json_carry_identical_values() {
    let cfg = config("spin=5/2\nlevel=all\nfield-min=0.01\nfield-max=0.3\npoints=4\nmethod=all");
    let rows = run_sweep(&cfg).unwrap();
    let csv = render_csv(&rows).unwrap();
    assert!(csv.starts_with(&CSV_HEADER.join(",")));
    let from_csv = parse_csv(&csv).unwrap();
    let json: Value = serde_json::from_str(&render_json(&rows, &cfg)).unwrap();
    let json_rows: Vec<ComparisonRow> = json["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| ComparisonRow {
            spin: r["spin"].as_str().unwrap().into(),
            n: r["n"].as_u64().unwrap() as u32,
            b: r["B"].as_str().unwrap().into(),
            gaps: serde_json::from_value(r["gaps"].clone()).unwrap(),
            rel_dev_vs_exact: serde_json::from_value(r["rel_dev_vs_exact"].clone()).unwrap(),
            status: serde_json::from_value(r["status"].clone()).unwrap(),
            digits_used: r["digits_used"].as_u64().unwrap() as u32,
            elapsed_ms: r["elapsed_ms"].as_u64().unwrap(),
        })
        .collect();
    assert_eq!(strip_timing(&from_csv), strip_timing(&rows));
    assert_eq!(strip_timing(&json_rows), strip_timing(&rows));
    assert_eq!(json["meta"]["tool"], "spingap");
    assert_eq!(json["meta"]["config"]["spin"], "5/2");
}

#[test]
fn sweeps_are_deterministic() {
    let cfg = config("spin=4\nlevel=all\nfield-min=0.001\nfield-max=1\npoints=5\nmethod=all");
    let first = strip_timing(&run_sweep(&cfg).unwrap());
    let second = strip_timing(&run_sweep(&cfg).unwrap());
    assert_eq!(render_csv(&first).unwrap(), render_csv(&second).unwrap());
}

#[test]
fn easy_plane_sweep_renumbers_levels() {
    let base = "spin=3\nlevel=all\nfield-min=0.01\nfield-max=0.2\npoints=3\nmethod=exact,leading\n";
    let axis = run_sweep(&config(base)).unwrap();
    let plane = run_sweep(&config(&format!("{base}anisotropy=easy-plane"))).unwrap();
    for row in &plane {
        let mirror = axis
            .iter()
            .find(|r| r.n == 2 - row.n && r.b == row.b)
            .unwrap();
        assert_eq!(row.gap(Method::Leading), mirror.gap(Method::Leading));
        let (p, a): (f64, f64) = (
            row.gap(Method::Exact).unwrap().parse().unwrap(),
            mirror.gap(Method::Exact).unwrap().parse().unwrap(),
        );
        assert!((p / a - 1.0).abs() < 1e-10, "n = {}, B = {}", row.n, row.b);
    }
}

#[test]
fn compare_lists_every_method() {
    let mut settings: Settings = parse_settings("spin=2\nfield=0.1\nlevel=all").unwrap();
    let cfg = SweepConfig::compare_from_settings(&settings).unwrap();
    let rows = run_compare(&cfg).unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row.gaps.len(), 4);
        assert_eq!(row.rel_dev_vs_exact.len(), 3);
        assert!(row.status.values().all(|s| s == "ok"));
    }
    settings.remove("field");
    assert!(matches!(
        SweepConfig::compare_from_settings(&settings),
        Err(Error::InvalidConfig(_))
    ));
}

#[test]
fn fit_examples() {
    let rows = run_sweep(&config(
        "spin=2\nfield-min=0.001\nfield-max=0.1\npoints=7\nmethod=leading",
    ))
    .unwrap();
    let fit = fit_exponent(&rows, FitColumn::Gap(Method::Leading)).unwrap();
    assert!((fit.slope - 4.0).abs() < 1e-9, "slope {}", fit.slope);

    let rows = run_sweep(&config(
        "spin=2\nfield-min=0.01\nfield-max=0.1\npoints=5\nmethod=exact,corrected",
    ))
    .unwrap();
    let fit = fit_exponent(&rows, FitColumn::Residual(Method::Corrected)).unwrap();
    assert!((fit.slope - 4.0).abs() <= 0.5, "slope {}", fit.slope);

    assert!(matches!(
        fit_exponent(&rows[..2], FitColumn::Gap(Method::Exact)),
        Err(Error::DegenerateFit(_))
    ));
    let mut broken = rows.clone();
    broken[0].gaps.insert("exact".into(), Some("0".into()));
    assert!(matches!(
        fit_exponent(&broken, FitColumn::Gap(Method::Exact)),
        Err(Error::DegenerateFit(_))
    ));
}

#[test]
fn spectrum_examples() {
    let report = run_spectrum(
        SpinValue::parse("1").unwrap(),
        &FieldValue::parse("0.5").unwrap(),
        Anisotropy::EasyAxis,
        PrecisionPolicy::auto(),
    )
    .unwrap();
    let rows: Vec<(&str, &str)> = report
        .levels
        .iter()
        .map(|l| (l.energy.as_str(), l.parity.as_str()))
        .collect();
    assert!(rows[0].0.starts_with("-1.2071067811865475244") && rows[0].1 == "even");
    assert_eq!(rows[1], ("-1", "odd"));
    assert!(rows[2].0.starts_with("0.2071067811865475244") && rows[2].1 == "even");
    assert_eq!(report.singlet, Some(2));

    let report = run_spectrum(
        SpinValue::parse("1/2").unwrap(),
        &FieldValue::parse("0.3").unwrap(),
        Anisotropy::EasyAxis,
        PrecisionPolicy::auto(),
    )
    .unwrap();
    let energies: Vec<&str> = report.levels.iter().map(|l| l.energy.as_str()).collect();
    assert_eq!(energies, ["-0.4", "-0.1"]);
    assert_eq!(report.singlet, None);

    let report = run_spectrum(
        SpinValue::parse("2").unwrap(),
        &FieldValue::parse("0.1").unwrap(),
        Anisotropy::EasyAxis,
        PrecisionPolicy::auto(),
    )
    .unwrap();
    assert_eq!(report.levels.len(), 5);
    let trace: f64 = report
        .levels
        .iter()
        .map(|l| l.energy.parse::<f64>().unwrap())
        .sum();
    assert!((trace + 10.0).abs() < 1e-12);
    assert!(report.doublets.iter().all(|d| d.adjacent));
}
