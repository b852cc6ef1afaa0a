//! Experiment configuration: kind-specific defaults, JSON files and dotted
//! `key=value` overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fit::{geometric_grid, RefineConfig};
use crate::harness::report::Format;
use crate::hgroup::homogeneous_dimension;
use crate::measure::FunctionSpec;
use crate::operators::Normalization;
use crate::potential::{PotentialSpec, RhoFitGrid, RhoSearch};
use crate::semigroup::TrotterConfig;
use crate::spaces::BallRefine;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Adams,
    WeakAdams,
    EndpointBmo,
    EndpointCampanato,
    Maximal,
    RhoLemma,
    KernelBounds,
    Hedberg,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Adams,
        ExperimentKind::WeakAdams,
        ExperimentKind::EndpointBmo,
        ExperimentKind::EndpointCampanato,
        ExperimentKind::Maximal,
        ExperimentKind::RhoLemma,
        ExperimentKind::KernelBounds,
        ExperimentKind::Hedberg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Adams => "adams",
            ExperimentKind::WeakAdams => "weak_adams",
            ExperimentKind::EndpointBmo => "endpoint_bmo",
            ExperimentKind::EndpointCampanato => "endpoint_campanato",
            ExperimentKind::Maximal => "maximal",
            ExperimentKind::RhoLemma => "rho_lemma",
            ExperimentKind::KernelBounds => "kernel_bounds",
            ExperimentKind::Hedberg => "hedberg",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

/// Exponents; `q` and `beta` are derived and only checked when given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exponents {
    pub alpha: f64,
    pub p: f64,
    pub kappa: f64,
    pub theta: f64,
    /// Damping exponent `N`.
    pub n_damping: f64,
    pub q: Option<f64>,
    pub beta: Option<f64>,
    /// Lipschitz order; also the upper limit for `beta`.
    pub delta: f64,
}

impl Default for Exponents {
    fn default() -> Self {
        Self { alpha: 1.0, p: 2.0, kappa: 0.25, theta: 0.0, n_damping: 0.0, q: None, beta: None, delta: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySettings {
    pub include_origin: bool,
    pub support_centers: usize,
    pub random_centers: usize,
    pub box_half_width: f64,
    pub radii: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub samples_per_ball: usize,
    pub refine: Option<BallRefine>,
}

impl Default for FamilySettings {
    fn default() -> Self {
        Self {
            include_origin: true,
            support_centers: 31,
            random_centers: 32,
            box_half_width: 4.0,
            radii: 24,
            r_min: 1e-2,
            r_max: 1e2,
            samples_per_ball: 512,
            refine: Some(BallRefine::default()),
        }
    }
}

/// Quadrature of the fractional integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorSettings {
    pub normalization: Normalization,
    pub radial_panels: usize,
    pub angles: usize,
    pub latitudes: usize,
}

impl Default for OperatorSettings {
    fn default() -> Self {
        Self { normalization: Normalization::Raw, radial_panels: 6, angles: 48, latitudes: 24 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximalSettings {
    pub radii: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
}

impl Default for MaximalSettings {
    fn default() -> Self {
        Self { radii: 48, r_min: 1e-2, r_max: 1e2, samples: 512 }
    }
}

/// Critical radius evaluation and the comparison-lemma pair design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RhoSettings {
    pub search: RhoSearch,
    /// Unit-ball template size for `r^{2-Q}∫_B V`.
    pub samples: usize,
    pub calibration_pairs: usize,
    pub held_out_pairs: usize,
    /// Pair base points lie in the gauge ball of this radius.
    pub pair_radius: f64,
    pub distance_min: f64,
    pub distance_max: f64,
    /// Calibration base points also paired with their dilates `δ_s u`, both orders.
    pub radial_bases: usize,
    pub radial_scales: Vec<f64>,
    pub grid: RhoFitGrid,
    pub com2_cases: usize,
}

impl Default for RhoSettings {
    fn default() -> Self {
        Self {
            search: RhoSearch::default(),
            samples: 8192,
            calibration_pairs: 160,
            held_out_pairs: 160,
            pair_radius: 5.0,
            distance_min: 1e-2,
            distance_max: 5.0,
            radial_bases: 24,
            radial_scales: vec![0.0, 0.25, 0.5],
            grid: RhoFitGrid::default(),
            com2_cases: 48,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointSettings {
    /// Candidate growth exponents `ϑ`.
    pub shapes: Vec<f64>,
    pub held_out_balls: usize,
    pub refine: RefineConfig,
}

impl Default for EndpointSettings {
    fn default() -> Self {
        Self { shapes: (0..=16).map(|k| k as f64 / 4.0).collect(), held_out_balls: 512, refine: RefineConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatSettings {
    pub samples: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub radius: f64,
    pub widths: Vec<f64>,
}

impl Default for HeatSettings {
    fn default() -> Self {
        Self { samples: 400, s_min: 0.1, s_max: 10.0, radius: 3.0, widths: geometric_grid(0.5, 64.0, 29) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairSettings {
    pub pairs: usize,
    pub center_radius: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl Default for PairSettings {
    fn default() -> Self {
        Self { pairs: 400, center_radius: 1.0, ratio_min: 1e-2, ratio_max: 1e2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSettings {
    pub gaussian: HeatSettings,
    pub localized: HeatSettings,
    /// Damping exponents for the localized heat bound.
    pub localized_n: Vec<f64>,
    pub majorant: PairSettings,
    pub lipschitz_triples: usize,
    /// Damping exponent of the Lipschitz check (run with `V ≡ 0`).
    pub lipschitz_n: f64,
    pub refine: RefineConfig,
    pub trotter: TrotterConfig,
}

impl Default for KernelSettings {
    fn default() -> Self {
        Self {
            gaussian: HeatSettings::default(),
            localized: HeatSettings { s_min: 0.01, s_max: 100.0, ..HeatSettings::default() },
            localized_n: vec![1.0, 2.0],
            majorant: PairSettings::default(),
            lipschitz_triples: 500,
            lipschitz_n: 0.0,
            refine: RefineConfig::default(),
            trotter: TrotterConfig { per_axis: 2, ..TrotterConfig::default() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HedbergSettings {
    pub points: usize,
    /// Evaluation points lie in the gauge ball of this radius.
    pub point_radius: f64,
    /// Seed of the comparison run; derived from `seed` when absent.
    pub alternate_seed: Option<u64>,
}

impl Default for HedbergSettings {
    fn default() -> Self {
        Self { points: 200, point_radius: 3.0, alternate_seed: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub adams_drift: f64,
    pub weak_adams_drift: f64,
    /// Relative perturbation of `q` in the control run.
    pub q_perturbation: f64,
    pub held_out_slack: f64,
    pub rho_violation: f64,
    pub seed_stability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            adams_drift: 0.05,
            weak_adams_drift: 0.08,
            q_perturbation: 0.1,
            held_out_slack: 1.0,
            rho_violation: 1.0,
            seed_stability: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub dir: String,
    /// File stem; the experiment name when absent.
    pub stem: Option<String>,
    pub formats: Vec<Format>,
    /// Record wall time in the report.
    pub timing: bool,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { dir: "reports".into(), stem: None, formats: vec![Format::Json, Format::Csv], timing: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub potential: PotentialSpec,
    pub function: FunctionSpec,
    /// Test-function corpus of the maximal check.
    pub corpus: Vec<FunctionSpec>,
    pub exponents: Exponents,
    pub dilations: Vec<f64>,
    /// `θ` values of the ratio curve in potential mode.
    pub theta_curve: Vec<f64>,
    pub family: FamilySettings,
    pub operator: OperatorSettings,
    pub maximal: MaximalSettings,
    pub rho: RhoSettings,
    pub endpoint: EndpointSettings,
    pub kernel: KernelSettings,
    pub hedberg: HedbergSettings,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub output: OutputSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_kind(ExperimentKind::Adams)
    }
}

fn indicator() -> FunctionSpec {
    FunctionSpec::Indicator { radius: 1.0 }
}

impl ExperimentConfig {
    /// The shipped scenario of each experiment kind.
    pub fn for_kind(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: kind,
            n: 1,
            potential: PotentialSpec::Zero,
            function: indicator(),
            corpus: vec![
                indicator(),
                FunctionSpec::GaugePower { gamma: 1.0, truncation: Some(2.0) },
                FunctionSpec::LogGauge { truncation: Some(1.0) },
                FunctionSpec::GaugeHolder { beta: 0.5, truncation: Some(1.0) },
                FunctionSpec::GaugeGaussian { width: 1.0 },
            ],
            exponents: Exponents::default(),
            dilations: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            theta_curve: vec![0.0, 0.5, 1.0],
            family: FamilySettings::default(),
            operator: OperatorSettings::default(),
            maximal: MaximalSettings::default(),
            rho: RhoSettings::default(),
            endpoint: EndpointSettings::default(),
            kernel: KernelSettings::default(),
            hedberg: HedbergSettings::default(),
            tolerances: Tolerances::default(),
            seed: 20240901,
            output: OutputSettings::default(),
        };
        let one = PotentialSpec::Constant { value: 1.0 };
        match kind {
            ExperimentKind::Adams => base,
            ExperimentKind::WeakAdams => Self { exponents: Exponents { p: 1.0, kappa: 0.5, ..Exponents::default() }, ..base },
            ExperimentKind::EndpointBmo | ExperimentKind::EndpointCampanato => {
                let kappa = if kind == ExperimentKind::EndpointBmo { 0.75 } else { 0.875 };
                Self {
                    potential: one,
                    exponents: Exponents { p: 1.0, kappa, n_damping: 2.0, ..Exponents::default() },
                    ..base
                }
            }
            ExperimentKind::Maximal => Self {
                potential: one,
                exponents: Exponents { p: 2.0, kappa: 0.5, theta: 1.0, n_damping: 4.0, ..Exponents::default() },
                ..base
            },
            ExperimentKind::RhoLemma => Self { potential: PotentialSpec::GaugePower { coefficient: 1.0, exponent: 2.0 }, ..base },
            ExperimentKind::KernelBounds => Self {
                potential: one,
                exponents: Exponents { n_damping: 2.0, ..Exponents::default() },
                ..base
            },
            ExperimentKind::Hedberg => Self {
                potential: one,
                exponents: Exponents { p: 2.0, kappa: 0.25, theta: 1.0, n_damping: 2.0, ..Exponents::default() },
                ..base
            },
        }
    }

    /// Defaults of `kind`, overlaid with `overlay` (objects merge
    /// recursively; tagged objects whose `kind` changes are replaced).
    pub fn from_value(kind: ExperimentKind, overlay: &Value) -> Result<Self> {
        let mut v = serde_json::to_value(Self::for_kind(kind))?;
        merge(&mut v, overlay);
        let cfg: Self = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a JSON document; the kind comes from `kind` or the document's
    /// `experiment` field, and the two must agree when both are given.
    pub fn load(path: Option<&Path>, kind: Option<ExperimentKind>, overrides: &[String]) -> Result<Self> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => Value::Object(Default::default()),
        };
        if !doc.is_object() {
            return Err(Error::Config("config must be a JSON object".into()));
        }
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let declared = match doc.get("experiment") {
            Some(Value::String(s)) => Some(s.parse::<ExperimentKind>()?),
            Some(other) => return Err(Error::Config(format!("`experiment` must be a string, got {other}"))),
            None => None,
        };
        let kind = match (kind, declared) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!("config declares experiment `{b}` but `{a}` was requested")))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => return Err(Error::Config("no experiment kind given".into())),
        };
        if let Value::Object(m) = &mut doc {
            m.insert("experiment".into(), Value::from(kind.name()));
        }
        Self::from_value(kind, &doc)
    }

    pub fn q_dim(&self) -> f64 {
        homogeneous_dimension(self.n) as f64
    }

    /// Structural checks; exponent relations are checked per experiment.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(1..=3).contains(&self.n) {
            return bad("n must be 1, 2 or 3");
        }
        let e = &self.exponents;
        for (name, v) in [("alpha", e.alpha), ("p", e.p), ("kappa", e.kappa), ("theta", e.theta), ("n_damping", e.n_damping), ("delta", e.delta)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("exponent `{name}` must be finite")));
            }
        }
        if e.theta < 0.0 || e.n_damping < 0.0 {
            return bad("theta and n_damping must be nonnegative");
        }
        if self.dilations.is_empty() || self.dilations.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return bad("dilations must be positive and nonempty");
        }
        if self.theta_curve.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return bad("theta_curve values must be nonnegative");
        }
        if !(self.tolerances.q_perturbation > 0.0 && self.tolerances.q_perturbation < 1.0) {
            return bad("q_perturbation must lie in (0, 1)");
        }
        if self.rho.radial_scales.iter().any(|s| !(0.0..1.0).contains(s)) {
            return bad("rho.radial_scales must lie in [0, 1)");
        }
        if self.output.formats.is_empty() {
            return bad("at least one output format is required");
        }
        Ok(())
    }

    pub fn stem(&self) -> String {
        self.output.stem.clone().unwrap_or_else(|| self.experiment.name().to_string())
    }
}

fn merge(base: &mut Value, overlay: &Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            let retag = matches!((b.get("kind"), o.get("kind")), (Some(x), Some(y)) if x != y);
            if retag {
                *b = o.clone();
                return;
            }
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

/// Applies `a.b.c=value` to a JSON document; `value` is parsed as JSON and
/// falls back to a string. Numeric segments index arrays.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let path = path.trim();
    if path.is_empty() {
        return Err(Error::Config(format!("override `{assignment}` has an empty key")));
    }
    let value: Value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::from(raw.trim()));
    let segments: Vec<&str> = path.split('.').collect();
    let mut node = doc;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        node = match node {
            Value::Object(m) => {
                if last {
                    m.insert(seg.to_string(), value);
                    return Ok(());
                }
                m.entry(seg.to_string()).or_insert(Value::Null)
            }
            Value::Array(a) => {
                let idx: usize = seg.parse().map_err(|_| Error::Config(format!("`{seg}` in `{path}` is not an array index")))?;
                if idx >= a.len() {
                    return Err(Error::Config(format!("index {idx} out of range in `{path}`")));
                }
                if last {
                    a[idx] = value;
                    return Ok(());
                }
                &mut a[idx]
            }
            _ => return Err(Error::Config(format!("`{path}` descends into a scalar"))),
        };
    }
    unreachable!("loop returns on the last segment")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        for kind in ExperimentKind::ALL {
            let cfg = ExperimentConfig::for_kind(kind);
            let back = ExperimentConfig::from_value(kind, &serde_json::to_value(&cfg).unwrap()).unwrap();
            assert_eq!(cfg, back);
            assert_eq!(kind.name().parse::<ExperimentKind>().unwrap(), kind);
        }
    }

    #[test]
    fn overrides_and_retagging() {
        let mut doc = serde_json::json!({});
        apply_override(&mut doc, "exponents.kappa=0.5").unwrap();
        apply_override(&mut doc, "potential.kind=zero").unwrap();
        apply_override(&mut doc, "dilations=[1,2]").unwrap();
        let cfg = ExperimentConfig::from_value(ExperimentKind::Hedberg, &doc).unwrap();
        assert_eq!(cfg.exponents.kappa, 0.5);
        assert_eq!(cfg.potential, PotentialSpec::Zero);
        assert_eq!(cfg.dilations, vec![1.0, 2.0]);
        apply_override(&mut doc, "dilations.1=4").unwrap();
        assert_eq!(doc["dilations"][1], 4);
        assert!(apply_override(&mut doc, "dilations.7=1").is_err());
        assert!(apply_override(&mut doc, "novalue").is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let doc = serde_json::json!({ "exponents": { "kapa": 0.5 } });
        assert!(matches!(ExperimentConfig::from_value(ExperimentKind::Adams, &doc), Err(Error::Config(_))));
        let doc = serde_json::json!({ "n": 9 });
        assert!(ExperimentConfig::from_value(ExperimentKind::Adams, &doc).is_err());
    }
}
