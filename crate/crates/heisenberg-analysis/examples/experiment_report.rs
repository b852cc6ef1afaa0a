//! Run a harness experiment from a config and write JSON, CSV and SVG reports.

use heisenberg_analysis::harness::{emit_report, run_experiment, ExperimentConfig, ExperimentKind, Format};

fn main() {
    let mut cfg = ExperimentConfig::for_kind(ExperimentKind::KernelBounds);
    cfg.kernel.lipschitz_triples = 60;
    cfg.kernel.majorant.pairs = 60;

    let report = run_experiment(&cfg).unwrap();
    for check in &report.checks {
        println!("{:<5} {} = {:.4}", if check.passed { "ok" } else { "FAIL" }, check.name, check.value);
    }
    println!("passed: {}", report.passed);

    let dir = std::env::temp_dir().join("hn-example");
    for path in emit_report(&report, &dir, &cfg.stem(), &[Format::Json, Format::Csv, Format::Svg]).unwrap() {
        println!("wrote {}", path.display());
    }
}
