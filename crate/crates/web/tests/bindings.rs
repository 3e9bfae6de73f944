use serde_json::Value;
use spingap_web::{gap_curves, level_fan, spectrum};

fn parse(text: &str) -> Value {
    serde_json::from_str(text).expect("valid json")
}

#[test]
fn gap_curves_rows_cover_grid_and_methods() {
    let rows = parse(&gap_curves("2", 0, "0.01", "0.1", 3, "exact,leading"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["B"], "0.01");
    assert_eq!(rows[2]["B"], "0.1");
    assert_eq!(rows[0]["status"]["exact"], "ok");
    assert!(rows[1]["rel_dev_vs_exact"]["leading"].is_string());
}

#[test]
fn spectrum_reports_pairs() {
    let report = parse(&spectrum("1/2", "0.3", "easy-axis"));
    let levels = report["levels"].as_array().unwrap();
    assert_eq!(levels[0]["energy"], "-0.4");
    assert_eq!(levels[1]["energy"], "-0.1");
    assert_eq!(report["doublets"][0]["splitting"], "0.3");
}

#[test]
fn level_fan_starts_at_zero_field() {
    let fan = parse(&level_fan("1", "1", 3, "easy-axis"));
    assert_eq!(fan["fields"], serde_json::json!(["0", "0.5", "1"]));
    let at_half: Vec<&str> = fan["energies"][1]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(at_half.len(), 3);
    assert!(at_half[2].starts_with("0.2071067811865475"));
}

#[test]
fn errors_are_json() {
    let err = parse(&spectrum("0", "0.1", "easy-axis"));
    assert_eq!(err["error"], "InvalidSpin");
    let err = parse(&level_fan("1", "1", 1, "easy-axis"));
    assert_eq!(err["error"], "InvalidConfig");
    let err = parse(&spectrum("1", "0.1", "sideways"));
    assert!(err["error"].is_string());
}
