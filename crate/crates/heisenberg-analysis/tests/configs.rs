use std::path::PathBuf;

use heisenberg_analysis::harness::{ExperimentConfig, ExperimentKind};
use heisenberg_analysis::potential::PotentialSpec;

fn shipped() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn every_shipped_config_loads() {
    let files = shipped();
    assert!(files.len() >= ExperimentKind::ALL.len());
    for path in &files {
        let cfg = ExperimentConfig::load(Some(path), None, &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(cfg.seed, 20240901, "{}", path.display());
    }
    for kind in ExperimentKind::ALL {
        assert!(
            files.iter().any(|p| ExperimentConfig::load(Some(p), None, &[]).unwrap().experiment == kind),
            "no config for {kind}"
        );
    }
}

#[test]
fn overrides_apply_after_file() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/rho_lemma.json");
    let cfg = ExperimentConfig::load(Some(&path), None, &["potential.exponent=1".into(), "seed=7".into()]).unwrap();
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.potential, PotentialSpec::GaugePower { coefficient: 1.0, exponent: 1.0 });
}

#[test]
fn conflicting_kind_is_rejected() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/adams.json");
    assert!(ExperimentConfig::load(Some(&path), Some(ExperimentKind::Hedberg), &[]).is_err());
}

#[test]
fn unknown_field_and_bad_values_are_rejected() {
    let kind = Some(ExperimentKind::Adams);
    assert!(ExperimentConfig::load(None, kind, &["exponents.gamma=1".into()]).is_err());
    assert!(ExperimentConfig::load(None, kind, &["n=7".into()]).is_err());
    assert!(ExperimentConfig::load(None, kind, &["dilations=[]".into()]).is_err());
    assert!(ExperimentConfig::load(None, kind, &["output.formats=[]".into()]).is_err());
    assert!(ExperimentConfig::load(None, kind, &["novalue".into()]).is_err());
}

#[test]
fn retagged_potential_replaces_fields() {
    let cfg = ExperimentConfig::load(None, Some(ExperimentKind::RhoLemma), &[r#"potential={"kind":"constant","value":2}"#.into()]).unwrap();
    assert_eq!(cfg.potential, PotentialSpec::Constant { value: 2.0 });
}
