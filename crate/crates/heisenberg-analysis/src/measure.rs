//! Integration on `H^n`: gauge-radial integrals, Monte-Carlo over balls,
//! grid quadrature and gauge-polar product rules.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hgroup::{homogeneous_dimension, unit_ball_volume, HBall, HPoint};
use crate::quad::{self, GaussLegendre};

/// Sampling and quadrature budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub mc_samples: usize,
    pub seed: u64,
    pub grid_resolution: usize,
    pub target_rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { mc_samples: 100_000, seed: 0x5eed, grid_resolution: 24, target_rel_tol: 1e-8 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.mc_samples == 0 {
            return Err(invalid("mc_samples", "must be at least 1"));
        }
        if !(self.target_rel_tol > 0.0 && self.target_rel_tol < 1.0) {
            return Err(invalid("target_rel_tol", "must lie in (0, 1)"));
        }
        if self.grid_resolution < 2 {
            return Err(invalid("grid_resolution", "must be at least 2"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, mc_samples: usize) -> Self {
        self.mc_samples = mc_samples;
        self
    }
}

/// Seeded generator for an independent sub-stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Point evaluator shared between threads.
pub type Evaluator = Arc<dyn Fn(&HPoint) -> f64 + Send + Sync>;

/// Symmetry hints that let operators tabulate their output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    None,
    /// `f(z, t)` depends only on `|z|` and `|t|`.
    Cylindrical,
}

/// A function on `H^n` given by an evaluator, with optional support and
/// quadrature nodes.
#[derive(Clone)]
pub struct SampledFunction {
    label: String,
    n: usize,
    eval: Evaluator,
    support: Option<HBall>,
    nodes: Option<Arc<Vec<(HPoint, f64)>>>,
    symmetry: Symmetry,
}

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("support", &self.support)
            .field("nodes", &self.nodes.as_ref().map(|v| v.len()))
            .field("symmetry", &self.symmetry)
            .finish()
    }
}

impl SampledFunction {
    pub fn new<F>(label: impl Into<String>, n: usize, f: F) -> Self
    where
        F: Fn(&HPoint) -> f64 + Send + Sync + 'static,
    {
        Self { label: label.into(), n, eval: Arc::new(f), support: None, nodes: None, symmetry: Symmetry::None }
    }

    pub fn zero(n: usize) -> Self {
        Self::new("zero", n, |_| 0.0).with_symmetry(Symmetry::Cylindrical)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::new(format!("constant({c})"), n, move |_| c).with_symmetry(Symmetry::Cylindrical)
    }

    /// `χ_B` for a ball `B`.
    pub fn indicator(ball: HBall) -> Self {
        let b = ball.clone();
        let sym = if ball.center.is_origin() { Symmetry::Cylindrical } else { Symmetry::None };
        Self::new(format!("indicator(r={})", ball.radius), ball.n(), move |u| if b.contains(u) { 1.0 } else { 0.0 })
            .with_support(ball)
            .with_symmetry(sym)
    }

    /// Declares a support ball; the evaluator is not modified.
    pub fn with_support(mut self, ball: HBall) -> Self {
        self.support = Some(ball);
        self
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    /// Attaches quadrature nodes; weights must be positive and nodes must
    /// lie in the support hint when one is declared.
    pub fn with_nodes(mut self, nodes: Vec<(HPoint, f64)>) -> Result<Self> {
        for (p, w) in &nodes {
            if p.n() != self.n {
                return Err(Error::DimensionMismatch { left: self.n, right: p.n() });
            }
            if !(*w > 0.0) || !w.is_finite() {
                return Err(invalid("weights", format!("weight {w} is not positive")));
            }
            if let Some(b) = &self.support {
                if b.center.distance(p) >= b.radius * (1.0 + 1e-12) {
                    return Err(invalid("nodes", format!("node {p} lies outside the support hint")));
                }
            }
        }
        self.nodes = Some(Arc::new(nodes));
        Ok(self)
    }

    pub fn eval(&self, u: &HPoint) -> f64 {
        (self.eval)(u)
    }

    pub fn evaluator(&self) -> Evaluator {
        self.eval.clone()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> Option<&HBall> {
        self.support.as_ref()
    }

    pub fn nodes(&self) -> Option<&[(HPoint, f64)]> {
        self.nodes.as_deref().map(|v| v.as_slice())
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// `c·f`.
    pub fn scaled(&self, c: f64) -> Self {
        let g = self.eval.clone();
        Self {
            label: format!("{c}*{}", self.label),
            n: self.n,
            eval: Arc::new(move |u| c * g(u)),
            support: self.support.clone(),
            nodes: self.nodes.clone(),
            symmetry: self.symmetry,
        }
    }

    /// `f ∘ δ_a`; the support hint is mapped to `δ_{1/a}` of the original.
    pub fn compose_dilation(&self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid("a", "dilation factor must be positive"));
        }
        let g = self.eval.clone();
        Ok(Self {
            label: format!("{}∘δ({a})", self.label),
            n: self.n,
            eval: Arc::new(move |u| g(&u.dilate(a))),
            support: self.support.as_ref().map(|b| b.dilate(1.0 / a)),
            nodes: None,
            symmetry: self.symmetry,
        })
    }

    /// Pointwise sum; the support hint is dropped unless both coincide.
    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let support = match (&self.support, &other.support) {
            (Some(a), Some(b)) if a == b => Some(a.clone()),
            _ => None,
        };
        let symmetry = if self.symmetry == other.symmetry { self.symmetry } else { Symmetry::None };
        Ok(Self {
            label: format!("{}+{}", self.label, other.label),
            n: self.n,
            eval: Arc::new(move |u| f(u) + g(u)),
            support,
            nodes: None,
            symmetry,
        })
    }

    /// Builds a function from its declarative description.
    pub fn from_spec(n: usize, spec: &FunctionSpec) -> Result<Self> {
        spec.build(n)
    }
}

/// Declarative test functions (the shipped corpus).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Zero,
    Constant { value: f64 },
    /// Indicator of `B(0, radius)`.
    Indicator { radius: f64 },
    /// `|u|^{-gamma}`, optionally restricted to `B(0, truncation)`.
    GaugePower { gamma: f64, truncation: Option<f64> },
    /// `log|u|`, optionally restricted to `B(0, truncation)`.
    LogGauge { truncation: Option<f64> },
    /// `|u|^beta`, optionally restricted to `B(0, truncation)`.
    GaugeHolder { beta: f64, truncation: Option<f64> },
    /// `exp(-|u|²/width²)`.
    GaugeGaussian { width: f64 },
}

impl FunctionSpec {
    pub fn build(&self, n: usize) -> Result<SampledFunction> {
        if n == 0 {
            return Err(invalid("n", "complex dimension must be positive"));
        }
        let truncated = |label: String, trunc: Option<f64>, g: Arc<dyn Fn(f64) -> f64 + Send + Sync>| -> Result<SampledFunction> {
            let f = match trunc {
                Some(r) => {
                    if !(r > 0.0) {
                        return Err(invalid("truncation", "must be positive"));
                    }
                    let g = g.clone();
                    SampledFunction::new(label, n, move |u: &HPoint| {
                        let d = u.norm();
                        if d < r && d > 0.0 {
                            g(d)
                        } else {
                            0.0
                        }
                    })
                    .with_support(HBall::centered(n, r)?)
                }
                None => SampledFunction::new(label, n, move |u: &HPoint| {
                    let d = u.norm();
                    if d > 0.0 {
                        g(d)
                    } else {
                        0.0
                    }
                }),
            };
            Ok(f.with_symmetry(Symmetry::Cylindrical))
        };
        match *self {
            FunctionSpec::Zero => Ok(SampledFunction::zero(n)),
            FunctionSpec::Constant { value } => Ok(SampledFunction::constant(n, value)),
            FunctionSpec::Indicator { radius } => Ok(SampledFunction::indicator(HBall::centered(n, radius)?)),
            FunctionSpec::GaugePower { gamma, truncation } => {
                truncated(format!("gauge_power({gamma})"), truncation, Arc::new(move |d: f64| d.powf(-gamma)))
            }
            FunctionSpec::LogGauge { truncation } => truncated("log_gauge".into(), truncation, Arc::new(|d: f64| d.ln())),
            FunctionSpec::GaugeHolder { beta, truncation } => {
                truncated(format!("gauge_holder({beta})"), truncation, Arc::new(move |d: f64| d.powf(beta)))
            }
            FunctionSpec::GaugeGaussian { width } => {
                if !(width > 0.0) {
                    return Err(invalid("width", "must be positive"));
                }
                Ok(SampledFunction::new(format!("gauge_gaussian({width})"), n, move |u| {
                    (-(u.norm() / width).powi(2)).exp()
                })
                .with_symmetry(Symmetry::Cylindrical))
            }
        }
    }
}

/// `c ∫_0^{r_max} F(ϱ) ϱ^{Q-1} dϱ` with `c = Q |B(0,1)|`.
///
/// Uses dyadic panels shrinking towards 0 so that integrable power
/// singularities at the origin are resolved; stops once the panel
/// contributions have decayed below the tolerance.
pub fn radial_integral<F: Fn(f64) -> f64>(f: F, r_max: f64, n: usize) -> Result<f64> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(invalid("r_max", "must be positive and finite"));
    }
    let q = homogeneous_dimension(n) as i32;
    let c = q as f64 * unit_ball_volume(n);
    let g = |r: f64| f(r) * r.powi(q - 1);
    let tol = 1e-14;
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut small_run = 0;
    let mut hi = r_max;
    for _ in 0..1000 {
        let lo = 0.5 * hi;
        let (v, _) = quad::adaptive(g, lo, hi, 1e-300, 1e-13, 4000)?;
        total += v;
        // geometric tail extrapolation once the decay ratio settles
        if let Some(p) = prev {
            if p != 0.0 && v != 0.0 {
                let ratio = v / p;
                if ratio > 0.0 && ratio < 0.999 && (v * ratio / (1.0 - ratio)).abs() <= tol * total.abs() {
                    return Ok(c * (total + v * ratio / (1.0 - ratio)));
                }
            }
        }
        if v.abs() <= tol * total.abs() || (v == 0.0 && total == 0.0) {
            small_run += 1;
            if small_run >= 4 {
                return Ok(c * total);
            }
        } else {
            small_run = 0;
        }
        prev = Some(v);
        hi = lo;
        if hi < f64::MIN_POSITIVE * 1e10 {
            break;
        }
    }
    Err(Error::NonConvergent(
        "radial integral: dyadic panel contributions do not decay (integrand not integrable at 0?)".into(),
    ))
}

/// Monte-Carlo integral with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub accepted: usize,
    pub drawn: usize,
}

const MC_BLOCK: usize = 8192;

/// Unbiased estimate of `∫_B f` by rejection sampling from `[-1,1]^{2n+1}`
/// mapped to `B` via `w ↦ center · δ_radius w`.
///
/// Draws are split into fixed blocks with independent seeded streams and
/// reduced in block order, so the result does not depend on threading.
pub fn mc_integral_ball(f: &SampledFunction, ball: &HBall, spec: &QuadratureSpec) -> Result<McEstimate> {
    spec.validate()?;
    let n = ball.n();
    if f.n() != n {
        return Err(Error::DimensionMismatch { left: f.n(), right: n });
    }
    let dim = 2 * n + 1;
    let blocks = spec.mc_samples.div_ceil(MC_BLOCK);
    let partial: Vec<(f64, f64, usize)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = MC_BLOCK.min(spec.mc_samples - b * MC_BLOCK);
            let mut rng = stream_rng(spec.seed, b as u64);
            let mut coords = vec![0.0; dim];
            let (mut s, mut s2, mut acc) = (0.0, 0.0, 0usize);
            for _ in 0..count {
                for c in coords.iter_mut() {
                    *c = rng.random_range(-1.0..1.0);
                }
                let w = HPoint::from_coords(coords.as_slice()).expect("finite");
                if w.norm() < 1.0 {
                    let v = f.eval(&ball.map_from_unit(&w));
                    s += v;
                    s2 += v * v;
                    acc += 1;
                }
            }
            (s, s2, acc)
        })
        .collect();
    let (mut s, mut s2, mut acc) = (0.0, 0.0, 0);
    for (a, b, c) in partial {
        s += a;
        s2 += b;
        acc += c;
    }
    if acc == 0 {
        return Err(Error::NoSamples { drawn: spec.mc_samples });
    }
    let m = spec.mc_samples as f64;
    let scale = 2f64.powi(dim as i32) * ball.radius.powi(homogeneous_dimension(n) as i32);
    let mean = s / m;
    let var = (s2 / m - mean * mean).max(0.0);
    Ok(McEstimate {
        value: scale * mean,
        stderr: scale * (var / m).sqrt(),
        accepted: acc,
        drawn: spec.mc_samples,
    })
}

/// Midpoint tensor grid on the bounding box of the unit ball, mapped to
/// `B`; cells whose midpoint falls outside `B` are dropped.
pub fn grid_nodes(ball: &HBall, resolution: usize) -> Result<Vec<(HPoint, f64)>> {
    if resolution < 2 {
        return Err(invalid("resolution", "must be at least 2"));
    }
    let n = ball.n();
    let dim = 2 * n + 1;
    let h = 2.0 / resolution as f64;
    let weight = h.powi(dim as i32) * ball.radius.powi(homogeneous_dimension(n) as i32);
    let total = resolution.pow(dim as u32);
    let mut out = Vec::new();
    let mut coords = vec![0.0; dim];
    for idx in 0..total {
        let mut k = idx;
        for c in coords.iter_mut() {
            *c = -1.0 + h * ((k % resolution) as f64 + 0.5);
            k /= resolution;
        }
        let w = HPoint::from_coords(coords.as_slice())?;
        if w.norm() < 1.0 {
            out.push((ball.map_from_unit(&w), weight));
        }
    }
    if out.is_empty() {
        return Err(invalid("resolution", "no grid node lies inside the ball"));
    }
    Ok(out)
}

/// `count` points uniformly distributed in the unit gauge ball.
pub fn unit_ball_samples(n: usize, count: usize, seed: u64, stream: u64) -> Vec<HPoint> {
    let dim = 2 * n + 1;
    let mut rng = stream_rng(seed, stream);
    let mut out = Vec::with_capacity(count);
    let mut coords = vec![0.0; dim];
    while out.len() < count {
        for c in coords.iter_mut() {
            *c = rng.random_range(-1.0..1.0);
        }
        let w = HPoint::from_coords(coords.as_slice()).expect("finite");
        if w.norm() < 1.0 {
            out.push(w);
        }
    }
    out
}

/// Product rule on the unit gauge sphere for `dv = ϱ^{Q-1} dϱ dσ(ω)`.
///
/// For `n = 1` the sphere is parametrised by
/// `ω = ((1-τ²)^{1/4} e^{iφ}, τ)` with `τ = sin β`, in which `dσ = dφ dβ`;
/// the rule is trapezoidal in `φ` and Gauss–Legendre in `β`. For `n ≥ 2`
/// the `S^{2n-1}` factor is sampled from a seeded stream and `τ` carries
/// the weight `(1-τ²)^{(n-2)/2}`. Weights sum to `Q |B(0,1)|`.
#[derive(Clone, Debug)]
pub struct GaugePolarRule {
    n: usize,
    directions: Vec<(HPoint, f64)>,
}

impl GaugePolarRule {
    pub fn new(n: usize, n_angle: usize, n_tau: usize, seed: u64) -> Result<Self> {
        if n == 0 || n_angle < 1 || n_tau < 1 {
            return Err(invalid("polar rule", "dimensions and node counts must be positive"));
        }
        let gl = GaussLegendre::new(n_tau);
        let mut directions = Vec::with_capacity(n_angle * n_tau);
        let pi = std::f64::consts::PI;
        if n == 1 {
            for (beta, wb) in gl.mapped(-0.5 * pi, 0.5 * pi) {
                let tau = beta.sin();
                let a = (1.0 - tau * tau).max(0.0).sqrt().sqrt();
                for k in 0..n_angle {
                    let phi = 2.0 * pi * (k as f64 + 0.5) / n_angle as f64;
                    let w = HPoint::h1(a * phi.cos(), a * phi.sin(), tau);
                    directions.push((w, wb * 2.0 * pi / n_angle as f64));
                }
            }
        } else {
            let mut rng = stream_rng(seed, 0x9017);
            let sphere_area = 2.0 * pi.powi(n as i32) / statrs::function::gamma::gamma(n as f64);
            let xis: Vec<Vec<f64>> = (0..n_angle)
                .map(|_| {
                    let v: Vec<f64> = (0..2 * n).map(|_| normal(&mut rng)).collect();
                    let s = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                    v.into_iter().map(|c| c / s).collect()
                })
                .collect();
            for (tau, wt) in gl.mapped(-1.0, 1.0) {
                let a = (1.0 - tau * tau).sqrt().sqrt();
                let jac = (1.0 - tau * tau).powf((n as f64 - 2.0) / 2.0);
                for xi in &xis {
                    let mut c: Vec<f64> = xi.iter().map(|v| a * v).collect();
                    c.push(tau);
                    let w = HPoint::from_coords(c.as_slice())?;
                    directions.push((w, wt * jac * sphere_area / n_angle as f64));
                }
            }
        }
        Ok(Self { n, directions })
    }

    /// Default rule for `n = 1` with 32 angles and 16 latitudes.
    pub fn standard(n: usize) -> Self {
        Self::new(n, 32, 16, 0).expect("valid default rule")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directions(&self) -> &[(HPoint, f64)] {
        &self.directions
    }

    /// `Σ_ω Σ_ϱ w_ω w_ϱ ϱ^{Q-1} g(center · δ_ϱ ω, ϱ)` over the given radial nodes.
    pub fn integrate<G: FnMut(&HPoint, f64) -> f64>(&self, center: &HPoint, radial: &[(f64, f64)], mut g: G) -> f64 {
        let q = homogeneous_dimension(self.n) as i32;
        let mut total = 0.0;
        for (omega, wo) in &self.directions {
            let mut s = 0.0;
            for &(r, wr) in radial {
                s += wr * r.powi(q - 1) * g(&center.mul(&omega.dilate(r)), r);
            }
            total += wo * s;
        }
        total
    }
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    // Box–Muller; one variate per call keeps streams simple.
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

    #[test]
    fn radial_indicator_is_ball_volume() {
        let v = radial_integral(|r| if r < 1.0 { 1.0 } else { 0.0 }, 1.0, 1).unwrap();
        assert!((v - PI2 / 2.0).abs() < 1e-10);
        assert_eq!(radial_integral(|_| 0.0, 1.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn radial_power_singularity() {
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let v = radial_integral(|r: f64| r.powf(alpha - 4.0), 1.0, 1).unwrap();
            let exact = 4.0 * (PI2 / 2.0) / alpha;
            assert!((v - exact).abs() < 1e-9 * exact, "alpha={alpha}: {v} vs {exact}");
        }
    }

    #[test]
    fn radial_rejects_non_integrable() {
        assert!(radial_integral(|r: f64| r.powi(-4), 1.0, 1).is_err());
    }

    #[test]
    fn mc_volume_is_seeded_and_translation_invariant() {
        let spec = QuadratureSpec::default().with_samples(50_000).with_seed(3);
        let one = SampledFunction::constant(1, 1.0);
        let b0 = HBall::centered(1, 1.0).unwrap();
        let e0 = mc_integral_ball(&one, &b0, &spec).unwrap();
        let e1 = mc_integral_ball(&one, &b0, &spec).unwrap();
        assert_eq!(e0, e1);
        let b1 = HBall::new(HPoint::h1(2.0, -1.0, 5.0), 1.0).unwrap();
        let e2 = mc_integral_ball(&one, &b1, &spec).unwrap();
        assert_eq!(e0.value, e2.value);
        assert!((e0.value - PI2 / 2.0).abs() < 4.0 * e0.stderr);
    }

    #[test]
    fn grid_nodes_fill_ball() {
        let b = HBall::new(HPoint::h1(0.3, 0.1, -0.2), 1.5).unwrap();
        let nodes = grid_nodes(&b, 24).unwrap();
        assert!(nodes.iter().all(|(p, _)| b.contains(p)));
        let vol: f64 = nodes.iter().map(|(_, w)| w).sum();
        assert!((vol / b.volume() - 1.0).abs() < 0.05);
        assert!(grid_nodes(&b, 1).is_err());
    }

    #[test]
    fn polar_rule_weights_and_moments() {
        let rule = GaugePolarRule::standard(1);
        let total: f64 = rule.directions().iter().map(|d| d.1).sum();
        assert!((total - 4.0 * PI2 / 2.0).abs() < 1e-10);
        // ∫_{B(0,1)} |z|² = ∫ ϱ^5 (1-τ²)^{1/2} dϱ dσ = (1/6)·2π·(π/2)·... checked against MC.
        let gl = GaussLegendre::new(12);
        let radial: Vec<(f64, f64)> = gl.mapped(0.0, 1.0).collect();
        let v = rule.integrate(&HPoint::origin(1), &radial, |u, _| u.z_norm_sq());
        let spec = QuadratureSpec::default().with_samples(400_000);
        let f = SampledFunction::new("z2", 1, |u| u.z_norm_sq());
        let mc = mc_integral_ball(&f, &HBall::centered(1, 1.0).unwrap(), &spec).unwrap();
        assert!((v - mc.value).abs() < 4.0 * mc.stderr, "{v} vs {mc:?}");
    }

    #[test]
    fn nodes_are_validated() {
        let b = HBall::centered(1, 1.0).unwrap();
        let f = SampledFunction::indicator(b);
        assert!(f.clone().with_nodes(vec![(HPoint::h1(0.1, 0.0, 0.0), -1.0)]).is_err());
        assert!(f.clone().with_nodes(vec![(HPoint::h1(3.0, 0.0, 0.0), 1.0)]).is_err());
        assert!(f.with_nodes(vec![(HPoint::h1(0.1, 0.0, 0.0), 1.0)]).is_ok());
    }
}
