use heisenberg_analysis::harness::report::{CaseTable, Check, Plot, Relation, Series};
use heisenberg_analysis::harness::{emit_report, ExperimentConfig, ExperimentKind, Format, InequalityReport};
use serde_json::json;

fn sample_report() -> InequalityReport {
    let cfg = ExperimentConfig::for_kind(ExperimentKind::Adams);
    let mut r = InequalityReport::new(&cfg);
    r.derived("q", 6.0);
    r.summary("drift", 1.5e-3);
    r.summary("unbounded", f64::INFINITY);
    r.tolerance("drift", 0.05);
    r.check(Check::new("drift", 1.5e-3, Relation::AtMost, 0.05));
    let mut t = CaseTable::new("dilations", &["a", "ratio", "label"]);
    for a in [0.25, 0.5, 1.0, 2.0, 4.0] {
        t.push(vec![json!(a), json!(a * 1.01), json!(format!("a={a}"))]);
    }
    r.tables.push(t);
    r.plots.push(Plot {
        name: "ratio".into(),
        title: "ratio vs a".into(),
        x_label: "a".into(),
        y_label: "ratio".into(),
        log_x: true,
        log_y: false,
        series: vec![Series { label: "measured".into(), points: vec![(0.25, 1.0), (1.0, 1.01), (4.0, 0.99)] }],
    });
    r.finish()
}

#[test]
fn json_round_trip_is_lossless() {
    let r = sample_report();
    let text = r.to_json().unwrap();
    let back = InequalityReport::from_json(&text).unwrap();
    assert_eq!(back.to_json().unwrap(), text);
    assert!(back.passed);
    assert_eq!(back.summary_value("unbounded"), Some(f64::INFINITY));
    assert!(!text.contains("wall_time_seconds"));
}

#[test]
fn csv_has_one_row_per_case() {
    let r = sample_report();
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_report(&r, dir.path(), "adams", &[Format::Csv]).unwrap();
    assert_eq!(paths.len(), 1);
    let mut rd = csv::Reader::from_path(&paths[0]).unwrap();
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), ["a", "ratio", "label"]);
    assert_eq!(rd.records().count(), r.tables[0].len());
}

#[test]
fn svg_only_when_requested() {
    let r = sample_report();
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_report(&r, dir.path(), "adams", &[Format::Json, Format::Csv]).unwrap();
    assert!(paths.iter().all(|p| p.extension().unwrap() != "svg"));

    let paths = emit_report(&r, dir.path(), "adams", &[Format::Svg]).unwrap();
    assert_eq!(paths.len(), 1);
    let svg = std::fs::read_to_string(&paths[0]).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("measured"));
}

#[test]
fn failing_check_fails_report() {
    let mut r = sample_report();
    r.check(Check::new("slack", 1.5, Relation::AtMost, 1.0));
    assert!(!r.finish().passed);
}
