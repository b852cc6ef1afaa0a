//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria whose stated reference values disagree with the measure actually
//! computed are listed in `EXPECTED_RED`; they are evaluated against the
//! stated values and reported as FAIL. The process exits nonzero only when a
//! criterion outside that list fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::Rng;

use heisenberg_analysis::fit::geometric_grid;
use heisenberg_analysis::harness::{run_experiment, ExperimentConfig, ExperimentKind, InequalityReport};
use heisenberg_analysis::hgroup::{unit_ball_volume, HBall, HPoint};
use heisenberg_analysis::measure::{mc_integral_ball, radial_integral, stream_rng, GaugePolarRule, QuadratureSpec, SampledFunction};
use heisenberg_analysis::potential::{critical_radius, CriticalRadiusField, Potential, PotentialSpec};
use heisenberg_analysis::quad::{composite_nodes, GaussLegendre};
use heisenberg_analysis::semigroup::{HeatKernel, NodeCloud, TrotterConfig, TrotterPropagator};
use heisenberg_analysis::spaces::{morrey_norm, weak_morrey_norm, BallFamily, FamilyConfig, SpaceParams};

const PI2: f64 = PI * PI;
const EXPECTED_RED: [u32; 4] = [2, 3, 6, 8];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_point(rng: &mut impl Rng, scale: f64) -> HPoint {
    let mut c = || scale * (2.0 * rng.random::<f64>() - 1.0);
    HPoint::h1(c(), c(), c())
}

fn coord_err(a: &HPoint, b: &HPoint, scale: f64) -> f64 {
    a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn c1_geometry() -> Outcome {
    let mut rng = stream_rng(1, 1);
    let (mut group, mut dil, mut inv) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let (u, v, w) = (random_point(&mut rng, 3.0), random_point(&mut rng, 3.0), random_point(&mut rng, 3.0));
        let scale = [&u, &v, &w].iter().map(|p| p.coords().iter().fold(1.0f64, |m, c| m.max(c.abs()))).fold(1.0, f64::max);
        let e = HPoint::origin(1);
        group = group
            .max(coord_err(&u.mul(&v).mul(&w), &u.mul(&v.mul(&w)), scale * scale))
            .max(coord_err(&u.mul(&e), &u, scale))
            .max(coord_err(&e.mul(&u), &u, scale))
            .max(coord_err(&u.mul(&u.inv()), &e, scale * scale))
            .max(coord_err(&u.inv().mul(&u), &e, scale * scale));
        let a = (8.0 * rng.random::<f64>() - 4.0).exp();
        dil = dil.max(rel(u.dilate(a).norm(), a * u.norm()));
        let d = u.distance(&v);
        let moved = w.mul(&u).distance(&w.mul(&v));
        inv = inv.max((moved - d).abs() / d.max(1e-300).max(u.norm().max(v.norm()).max(w.norm()) * 1e-4));
    }
    let worst = group.max(dil).max(inv);
    Outcome::new(
        worst <= 1e-12,
        format!("group {group:.1e}, dilation {dil:.1e}, left invariance {inv:.1e} (limit 1e-12, 10^4 cases)"),
    )
}

fn c2_ball_volume() -> Outcome {
    let spec = QuadratureSpec::default().with_samples(1_000_000).with_seed(2);
    let est = mc_integral_ball(&SampledFunction::constant(1, 1.0), &HBall::centered(1, 1.0).unwrap(), &spec).unwrap();
    let err = rel(est.value, PI2);
    Outcome::new(
        err <= 5e-3,
        format!(
            "MC |B(0,1)| = {:.5} ± {:.5}; stated π² = {PI2:.5}, rel err {err:.3} (limit 0.005); exact measure π²/2 = {:.5}",
            est.value,
            est.stderr,
            unit_ball_volume(1)
        ),
    )
}

fn c3_radial() -> Outcome {
    let ball = radial_integral(|r| if r < 1.0 { 1.0 } else { 0.0 }, 1.0, 1).unwrap();
    let mut worst = (ball - PI2).abs();
    let mut parts = vec![format!("χ: {ball:.8} vs stated π² = {PI2:.8}")];
    for alpha in [0.5, 1.0, 2.0, 3.0] {
        let v = radial_integral(|r: f64| r.powf(alpha - 4.0), 1.0, 1).unwrap();
        let stated = 4.0 * PI2 / alpha;
        worst = worst.max((v - stated).abs());
        parts.push(format!("α={alpha}: {v:.8} vs {stated:.8}"));
    }
    Outcome::new(worst <= 1e-6, format!("{}; worst abs err {worst:.3e} (limit 1e-6)", parts.join("; ")))
}

fn c4_heat() -> Outcome {
    let k = HeatKernel::shared(1);
    let h0 = k.eval(1.0, &HPoint::origin(1)).unwrap().value;
    let closed = 2.0 / (2.0 * PI) / (4.0 * PI) * PI2 / 4.0;
    let origin_ok = (h0 - 0.0625).abs() <= 1e-4 && (h0 - closed).abs() <= 1e-4;

    let rule = GaugePolarRule::new(1, 8, 48, 0).unwrap();
    let gl = GaussLegendre::new(16);
    let mut masses = Vec::new();
    for s in [0.25f64, 1.0, 4.0] {
        let radial = composite_nodes(&gl, 0.0, 9.0 * s.sqrt(), 24);
        let m = rule.integrate(&HPoint::origin(1), &radial, |u, _| k.eval(s, u).map(|h| h.value).unwrap_or(f64::NAN));
        masses.push((s, m));
    }
    let mass_ok = masses.iter().all(|(_, m)| (m - 1.0).abs() <= 5e-3);

    let mut rng = stream_rng(4, 1);
    let mut scale_err = 0.0f64;
    for _ in 0..100 {
        let a = (3.0 * rng.random::<f64>() - 1.5).exp();
        let s = (3.0 * rng.random::<f64>() - 1.5).exp();
        let u = random_point(&mut rng, 2.0);
        let lhs = k.eval(a * a * s, &u.dilate(a)).unwrap().value;
        let rhs = a.powi(-4) * k.eval(s, &u).unwrap().value;
        if rhs > 1e-200 {
            scale_err = scale_err.max(rel(lhs, rhs));
        }
    }
    let scale_ok = scale_err <= 1e-10;
    let ms: Vec<String> = masses.iter().map(|(s, m)| format!("∫H_{s} = {m:.6}")).collect();
    Outcome::new(
        origin_ok && mass_ok && scale_ok,
        format!("H_1(0) = {h0:.10} (closed form {closed:.10}); {}; scaling rel err {scale_err:.1e}", ms.join(", ")),
    )
}

fn c5_trotter() -> Outcome {
    let f = SampledFunction::indicator(HBall::centered(1, 1.0).unwrap());
    let cfg = TrotterConfig { per_axis: 16, max_steps: 4, ..TrotterConfig::default() };
    let c = 0.7;
    let p = TrotterPropagator::new(Potential::constant(1, c).unwrap(), cfg.clone()).unwrap();
    let vals = p.cloud().sample(&f);
    let free = p.free_apply_nodes(1.0, &vals).unwrap();
    let mut ident = 0.0f64;
    for m in [1, 2, 4] {
        let out = p.apply_nodes(1.0, &vals, m).unwrap();
        for (a, b) in out.iter().zip(&free) {
            ident = ident.max((a - (-c as f64).exp() * b).abs());
        }
    }

    let q = TrotterPropagator::new(Potential::gauge_power(1, 1.0, 2.0).unwrap(), cfg).unwrap();
    let s = 0.5;
    let k = q.kernel_matrix(s, 2).unwrap();
    let h = q.free_kernel_matrix(s).unwrap();
    let violations = k.iter().zip(h.iter()).filter(|(a, b)| !(**a >= 0.0 && **a <= **b * (1.0 + 1e-12))).count();

    let fine = TrotterPropagator::new(
        Potential::gauge_power(1, 1.0, 2.0).unwrap(),
        TrotterConfig { per_axis: 16, max_steps: 16, ..TrotterConfig::default() },
    )
    .unwrap();
    let trend = fine.trotter_trend(s, &f, &[1, 2, 4, 8, 16]).unwrap();
    let decreasing = trend.windows(2).all(|w| w[1].1 < w[0].1);
    let cloud = NodeCloud::tensor_box(3.0, 4.0, 16).unwrap().len();
    let tr: Vec<String> = trend.iter().map(|(m, d)| format!("{m}:{d:.2e}")).collect();
    Outcome::new(
        ident <= 1e-8 && violations == 0 && decreasing,
        format!(
            "{cloud} nodes; constant-V identity {ident:.1e}; domination violations {violations}/{}; m→2m changes [{}]",
            k.len(),
            tr.join(", ")
        ),
    )
}

fn c6_critical_radius() -> Outcome {
    let spec = QuadratureSpec::default().with_samples(8192);
    let origin = HPoint::origin(1);
    let one = Potential::constant(1, 1.0).unwrap();
    let sq = Potential::gauge_power(1, 1.0, 2.0).unwrap();
    let r1 = critical_radius(&origin, &one, &spec).unwrap().rho;
    let r2 = critical_radius(&origin, &sq, &spec).unwrap().rho;
    let stated2 = (2.0 / 3.0 * PI2).powf(-0.25);
    let values_ok = rel(r1, 1.0 / PI) <= 0.01 && rel(r2, stated2) <= 0.01;

    let mut fits = Vec::new();
    for (label, kind) in [("V≡1", ExperimentKind::RhoLemma), ("|u|²", ExperimentKind::RhoLemma)] {
        let mut cfg = ExperimentConfig::for_kind(kind);
        if label == "V≡1" {
            cfg.potential = PotentialSpec::Constant { value: 1.0 };
        }
        let report = run_experiment(&cfg).unwrap();
        fits.push((label, report.summary_value("max_violation").unwrap(), report.passed));
    }
    let fits_ok = fits.iter().all(|(_, v, p)| *v <= 1.0 && *p);
    let fs: Vec<String> = fits.iter().map(|(l, v, _)| format!("{l} held-out max_violation {v:.4}")).collect();
    Outcome::new(
        values_ok && fits_ok,
        format!(
            "ρ(0; V≡1) = {r1:.5} vs stated 1/π = {:.5}; ρ(0; |u|²) = {r2:.5} vs stated {stated2:.5}; closed forms {:.5}, {:.5}; {}",
            1.0 / PI,
            one.closed_form_rho(&origin).unwrap(),
            sq.closed_form_rho(&origin).unwrap(),
            fs.join(", ")
        ),
    )
}

fn checks_line(r: &InequalityReport) -> String {
    r.checks
        .iter()
        .map(|c| format!("{}={:.4}{}", c.name, c.value, if c.passed { "" } else { "(x)" }))
        .collect::<Vec<_>>()
        .join(" ")
}

fn c7_kernel_bounds() -> Outcome {
    let r = run_experiment(&ExperimentConfig::for_kind(ExperimentKind::KernelBounds)).unwrap();
    let triples = r.config.kernel.lipschitz_triples;
    Outcome::new(r.passed && triples == 500, format!("{} ({triples} Lipschitz triples)", checks_line(&r)))
}

fn c8_morrey() -> Outcome {
    let b = HBall::centered(1, 1.0).unwrap();
    let f = SampledFunction::indicator(b.clone());
    let field = CriticalRadiusField::classical(1);
    let params = SpaceParams::morrey(2.0, 0.5, 0.0).classical();
    let family = BallFamily::build(1, Some(&b), &FamilyConfig { seed: 8, ..FamilyConfig::default() }).unwrap();
    let est = morrey_norm(&f, &params, &family, &field).unwrap();
    let stated = PI.sqrt();
    let value_ok = rel(est.value, stated) <= 0.02;
    let maximizer_ok = est.maximizer.center.norm() < 0.2 && (est.maximizer.radius - 1.0).abs() < 0.1;

    let expected = -4.0 * (1.0 - 0.5) / 2.0;
    let mut worst = 0.0f64;
    let mut exps = Vec::new();
    for a in [0.25, 0.5, 2.0, 4.0] {
        let g = f.compose_dilation(a).unwrap();
        let v = morrey_norm(&g, &params, &family, &field).unwrap().value;
        let e = (v / est.value).ln() / f64::ln(a);
        worst = worst.max(rel(e, expected));
        exps.push(format!("{a}:{e:.4}"));
    }
    let weak = weak_morrey_norm(&f, &params, &family.clone().with_refine(None), &field).unwrap();
    let strong = morrey_norm(&f, &params, &family.with_refine(None), &field).unwrap();
    let ordered = weak.per_ball.iter().zip(&strong.per_ball).all(|(w, s)| w.value <= s.value * (1.0 + 1e-12));
    Outcome::new(
        value_ok && maximizer_ok && worst <= 0.02 && ordered,
        format!(
            "‖χ_B‖ = {:.5} vs stated √π = {stated:.5} (exact (π²/2)^(1/4) = {:.5}); maximizer r = {:.3} |c| = {:.3}; \
             exponents [{}] vs {expected} (worst rel {worst:.4}); weak ≤ strong on every ball: {ordered}",
            est.value,
            unit_ball_volume(1).powf(0.25),
            est.maximizer.radius,
            est.maximizer.center.norm(),
            exps.join(", ")
        ),
    )
}

fn harness_criterion(kinds: &[ExperimentKind], budget: Duration) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for &kind in kinds {
        let start = Instant::now();
        let r = run_experiment(&ExperimentConfig::for_kind(kind)).unwrap();
        let t = start.elapsed();
        pass &= r.passed && t <= budget;
        parts.push(format!("{kind}: {} [{:.1} s]", checks_line(&r), t.as_secs_f64()));
    }
    Outcome::new(pass, parts.join("; "))
}

fn reduced(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::for_kind(kind);
    c.family.radii = 8;
    c.family.support_centers = 4;
    c.family.random_centers = 4;
    c.family.samples_per_ball = 64;
    c.family.refine = None;
    c.dilations = vec![0.5, 2.0];
    c.corpus.truncate(2);
    c.operator.radial_panels = 2;
    c.operator.angles = 12;
    c.operator.latitudes = 6;
    c.maximal.radii = 8;
    c.maximal.samples = 64;
    c.rho.samples = 512;
    c.rho.calibration_pairs = 16;
    c.rho.held_out_pairs = 16;
    c.rho.radial_bases = 4;
    c.rho.com2_cases = 8;
    c.endpoint.held_out_balls = 32;
    c.endpoint.refine.starts = 1;
    c.kernel.gaussian.samples = 40;
    c.kernel.localized.samples = 40;
    c.kernel.gaussian.widths = geometric_grid(0.5, 64.0, 8);
    c.kernel.localized.widths = geometric_grid(0.5, 64.0, 8);
    c.kernel.majorant.pairs = 40;
    c.kernel.lipschitz_triples = 40;
    c.kernel.refine.starts = 1;
    c.hedberg.points = 16;
    c
}

fn c12_reproducibility() -> Outcome {
    let mut pass = true;
    let mut worst_overhead = Duration::ZERO;
    let mut parts = Vec::new();
    for kind in ExperimentKind::ALL {
        let cfg = reduced(kind);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        let start = Instant::now();
        let (ja, jb) = (a.to_json().unwrap(), b.to_json().unwrap());
        let same = ja.as_bytes() == jb.as_bytes();
        let overhead = start.elapsed();
        worst_overhead = worst_overhead.max(overhead);
        pass &= same;
        parts.push(format!("{kind}:{}", if same { "identical" } else { "DIFFERENT" }));
    }
    pass &= worst_overhead < Duration::from_secs(1);
    Outcome::new(pass, format!("{}; serialization and comparison ≤ {:.3} s", parts.join(" "), worst_overhead.as_secs_f64()))
}

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "geometry suite", 1, c1_geometry),
        (2, "unit ball volume", 5, c2_ball_volume),
        (3, "radial formula", 1, c3_radial),
        (4, "heat kernel", 60, c4_heat),
        (5, "trotter splitting", 120, c5_trotter),
        (6, "critical radius", 60, c6_critical_radius),
        (7, "kernel bounds", 180, c7_kernel_bounds),
        (8, "morrey estimators", 60, c8_morrey),
        (9, "adams check", 240, || harness_criterion(&[ExperimentKind::Adams, ExperimentKind::WeakAdams], Duration::from_secs(120))),
        (10, "endpoint check", 240, || {
            harness_criterion(&[ExperimentKind::EndpointBmo, ExperimentKind::EndpointCampanato], Duration::from_secs(120))
        }),
        (11, "hedberg check", 120, || harness_criterion(&[ExperimentKind::Hedberg], Duration::from_secs(120))),
        (12, "reproducibility", 600, c12_reproducibility),
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut unexpected = Vec::new();
    for (id, name, budget, run) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let t = start.elapsed().as_secs_f64();
        let pass = out.pass && t <= budget as f64;
        println!("{} C{id:<2} {name}: {} [{t:.1} s / {budget} s]", if pass { "PASS" } else { "FAIL" }, out.detail);
        if !pass && !EXPECTED_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
