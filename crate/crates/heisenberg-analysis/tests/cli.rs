use std::path::Path;
use std::process::Command;

const SMALL: &[&str] = &[
    "--set",
    "kernel.gaussian.samples=40",
    "--set",
    "kernel.localized.samples=40",
    "--set",
    "kernel.majorant.pairs=40",
    "--set",
    "kernel.lipschitz_triples=40",
];

fn hn(args: &[&str], out: &Path) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hn-verify"));
    cmd.args(args);
    if args[0] != "default-config" {
        cmd.arg("--out").arg(out);
    }
    let o = cmd.output().unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr))
}

#[test]
fn passing_run_exits_zero_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["kernel-bounds", "--emit", "json,csv,svg", "--seed", "11"];
    args.extend_from_slice(SMALL);
    let (code, text) = hn(&args, dir.path());
    assert_eq!(code, 0, "{text}");
    let names: Vec<String> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert!(names.iter().any(|n| n == "kernel_bounds.json"), "{names:?}");
    assert!(names.iter().any(|n| n.ends_with(".csv")));
    assert!(names.iter().any(|n| n.ends_with(".svg")));
    let json = std::fs::read_to_string(dir.path().join("kernel_bounds.json")).unwrap();
    assert!(json.contains("\"seed\": 11") || json.contains("\"seed\":11"));
}

#[test]
fn violated_tolerance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["kernel-bounds", "--emit", "json", "--set", "tolerances.held_out_slack=0.01"];
    args.extend_from_slice(SMALL);
    let (code, text) = hn(&args, dir.path());
    assert_eq!(code, 1, "{text}");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["adams", "--set", "exponents.bogus=1"],
        vec!["adams", "--emit", "pdf"],
        vec!["adams", "--config", "/nonexistent/config.json"],
        vec!["maximal", "--set", "exponents.theta=0"],
        vec!["hedberg", "--set", "exponents.kappa=0.9"],
        vec!["default-config", "no-such-kind"],
    ] {
        let (code, text) = hn(&args, dir.path());
        assert_eq!(code, 2, "{args:?}: {text}");
    }
}

#[test]
fn default_config_prints_loadable_json() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = hn(&["default-config", "hedberg"], dir.path());
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["experiment"], "hedberg");
}
