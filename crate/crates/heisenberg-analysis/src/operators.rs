//! Fractional integrals, the localized maximal operator `M_{ρ,N}` and the
//! Hedberg pointwise bound.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::fit::geometric_grid;
use crate::hgroup::{homogeneous_dimension, HBall, HPoint};
use crate::measure::{unit_ball_samples, GaugePolarRule, SampledFunction, Symmetry};
use crate::potential::CriticalRadiusField;
use crate::quad::{golden_max, GaussLegendre};
use crate::semigroup::kalpha::kalpha_eval;
use crate::semigroup::trotter::TrotterPropagator;
use crate::spaces::{morrey_norm, BallFamily, NormEstimate, SpaceParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorMode {
    /// `∫ [1+|v⁻¹u|/ρ(u)]^{-N} |v⁻¹u|^{α-Q} |f(v)| dv`.
    Surrogate,
    /// `∫ K_α(u,v) f(v) dv` with the Trotter kernel.
    Semigroup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    /// Surrogate scaled by `Γ((Q-α)/2)/Γ(α/2)`.
    Gamma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FracIntegralConfig {
    pub alpha: f64,
    pub mode: OperatorMode,
    pub n_damping: f64,
    pub normalization: Normalization,
    /// Gauss–Legendre panels (order 8) along each ray.
    pub radial_panels: usize,
    pub angles: usize,
    pub latitudes: usize,
}

impl Default for FracIntegralConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            mode: OperatorMode::Surrogate,
            n_damping: 0.0,
            normalization: Normalization::Raw,
            radial_panels: 6,
            angles: 48,
            latitudes: 24,
        }
    }
}

impl FracIntegralConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        let q = homogeneous_dimension(n) as f64;
        if !(self.alpha > 0.0 && self.alpha < q) {
            return Err(invalid("alpha", format!("must lie in (0, {q})")));
        }
        if !(self.n_damping >= 0.0 && self.n_damping.is_finite()) {
            return Err(invalid("N", "must be nonnegative"));
        }
        if self.radial_panels == 0 || self.angles == 0 || self.latitudes == 0 {
            return Err(invalid("quadrature", "node counts must be positive"));
        }
        Ok(())
    }
}

/// Beyond `FAR_FIELD · R` from the support center the polar rule is centered
/// on the support instead of on the evaluation point.
pub const FAR_FIELD: f64 = 1.2;

/// Fractional integral operator bound to a critical-radius field.
pub struct RieszOperator {
    cfg: FracIntegralConfig,
    field: Arc<CriticalRadiusField>,
    prop: Option<Arc<TrotterPropagator>>,
    rule: GaugePolarRule,
    gl: GaussLegendre,
    q: f64,
}

impl std::fmt::Debug for RieszOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RieszOperator").field("cfg", &self.cfg).field("field", &self.field).finish()
    }
}

impl RieszOperator {
    pub fn new(cfg: FracIntegralConfig, field: Arc<CriticalRadiusField>) -> Result<Self> {
        let n = field.n();
        cfg.validate(n)?;
        let rule = GaugePolarRule::new(n, cfg.angles, cfg.latitudes, 0)?;
        Ok(Self { q: homogeneous_dimension(n) as f64, cfg, field, prop: None, rule, gl: GaussLegendre::new(8) })
    }

    /// Propagator for semigroup mode.
    pub fn with_propagator(mut self, prop: Arc<TrotterPropagator>) -> Self {
        self.prop = Some(prop);
        self
    }

    pub fn config(&self) -> &FracIntegralConfig {
        &self.cfg
    }

    pub fn field(&self) -> &CriticalRadiusField {
        &self.field
    }

    fn norm_factor(&self) -> f64 {
        match (self.cfg.mode, self.cfg.normalization) {
            (OperatorMode::Surrogate, Normalization::Gamma) => {
                gamma((self.q - self.cfg.alpha) / 2.0) / gamma(self.cfg.alpha / 2.0)
            }
            _ => 1.0,
        }
    }

    /// `k(u,v)·|v⁻¹u|^{Q-α}` and the sign convention of the mode.
    fn reduced_kernel(&self, u: &HPoint, v: &HPoint, d: f64) -> Result<f64> {
        match self.cfg.mode {
            OperatorMode::Surrogate => self.field.bracket(u, d, -self.cfg.n_damping),
            OperatorMode::Semigroup => {
                let prop = self.prop.as_ref().ok_or_else(|| invalid("mode", "semigroup mode needs a propagator"))?;
                Ok(kalpha_eval(self.cfg.alpha, u, v, prop)? * d.powf(self.q - self.cfg.alpha))
            }
        }
    }

    fn density(&self, f: &SampledFunction, v: &HPoint) -> f64 {
        match self.cfg.mode {
            OperatorMode::Surrogate => f.eval(v).abs(),
            OperatorMode::Semigroup => f.eval(v),
        }
    }

    /// Radial nodes in `ϱ` for `∫_{lo}^{hi} ϱ^{α-1} h(ϱ) dϱ` via `y = ϱ^α`.
    fn ray_nodes(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let a = self.cfg.alpha;
        let (ylo, yhi) = (lo.powf(a), hi.powf(a));
        if yhi <= ylo {
            return Vec::new();
        }
        let panels = self.cfg.radial_panels;
        let h = (yhi - ylo) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.gl.nodes.len());
        for k in 0..panels {
            let (p0, p1) = (ylo + k as f64 * h, ylo + (k + 1) as f64 * h);
            for (y, w) in self.gl.mapped(p0, p1) {
                out.push((y.powf(1.0 / a), w / a));
            }
        }
        out
    }

    fn support_of<'a>(&self, f: &'a SampledFunction) -> Result<&'a HBall> {
        f.support().ok_or_else(|| invalid("f", "fractional integrals need a bounded support hint"))
    }

    /// `∫ k(u,v) f(v) dv` split at `|v⁻¹u| = σ` into (inner, outer).
    pub fn apply_split(&self, f: &SampledFunction, u: &HPoint, sigma: f64) -> Result<(f64, f64)> {
        let supp = self.support_of(f)?;
        let d0 = u.distance(&supp.center);
        let lo = (d0 - supp.radius).max(0.0);
        let hi = d0 + supp.radius;
        let s = sigma.clamp(lo, hi);
        let inner = self.near_field(f, u, lo, s)?;
        let outer = self.near_field(f, u, s, hi)?;
        let c = self.norm_factor();
        Ok((c * inner, c * outer))
    }

    fn near_field(&self, f: &SampledFunction, u: &HPoint, lo: f64, hi: f64) -> Result<f64> {
        let nodes = self.ray_nodes(lo, hi);
        let mut total = 0.0;
        for (omega, wo) in self.rule.directions() {
            let mut s = 0.0;
            for &(r, wr) in &nodes {
                let v = u.mul(&omega.dilate(r));
                let g = self.density(f, &v);
                if g != 0.0 {
                    s += wr * g * self.reduced_kernel(u, &v, r)?;
                }
            }
            total += wo * s;
        }
        Ok(total)
    }

    fn far_field(&self, f: &SampledFunction, u: &HPoint, supp: &HBall) -> Result<f64> {
        let q = self.q;
        let panels = self.cfg.radial_panels;
        let yhi = supp.radius.powf(q);
        let h = yhi / panels as f64;
        let mut nodes = Vec::new();
        for k in 0..panels {
            for (y, w) in self.gl.mapped(k as f64 * h, (k + 1) as f64 * h) {
                nodes.push((y.powf(1.0 / q), w / q));
            }
        }
        let mut total = 0.0;
        for (omega, wo) in self.rule.directions() {
            let mut s = 0.0;
            for &(r, wr) in &nodes {
                let v = supp.center.mul(&omega.dilate(r));
                let g = self.density(f, &v);
                if g != 0.0 {
                    let d = u.distance(&v);
                    s += wr * g * self.reduced_kernel(u, &v, d)? * d.powf(self.cfg.alpha - q);
                }
            }
            total += wo * s;
        }
        Ok(total)
    }

    /// `T_α f(u)`.
    pub fn apply(&self, f: &SampledFunction, u: &HPoint) -> Result<f64> {
        if f.n() != u.n() {
            return Err(Error::DimensionMismatch { left: f.n(), right: u.n() });
        }
        let supp = self.support_of(f)?;
        let d0 = u.distance(&supp.center);
        let raw = if d0 > FAR_FIELD * supp.radius {
            self.far_field(f, u, supp)?
        } else {
            self.near_field(f, u, (d0 - supp.radius).max(0.0), d0 + supp.radius)?
        };
        Ok(self.norm_factor() * raw)
    }

    /// `T_α f` as a function; tabulated when `f` is cylindrically symmetric
    /// with support centered at the origin, direct otherwise.
    pub fn transform(self: &Arc<Self>, f: &SampledFunction) -> Result<SampledFunction> {
        let label = format!("I_{}[{}]", self.cfg.alpha, f.label());
        let supp = self.support_of(f)?.clone();
        let symmetric = f.symmetry() == Symmetry::Cylindrical && supp.center.is_origin() && self.symmetric_potential();
        if symmetric && self.cfg.mode == OperatorMode::Surrogate {
            let op = self.clone();
            let g = f.clone();
            let table = SymmetricTable::build(f.n(), supp.radius, TableGrid::default(), |u| op.apply(&g, u))?;
            let op = self.clone();
            let g = f.clone();
            let table = Arc::new(table);
            return Ok(SampledFunction::new(label, f.n(), move |u| {
                table.eval(u).unwrap_or_else(|| op.apply(&g, u).unwrap_or(f64::NAN))
            })
            .with_symmetry(Symmetry::Cylindrical));
        }
        let op = self.clone();
        let g = f.clone();
        Ok(SampledFunction::new(label, f.n(), move |u| op.apply(&g, u).unwrap_or(f64::NAN)))
    }

    fn symmetric_potential(&self) -> bool {
        symmetric_field(&self.field)
    }
}

/// `T_α f(u)` for a surrogate-mode configuration.
pub fn riesz_apply(f: &SampledFunction, u: &HPoint, cfg: &FracIntegralConfig, field: Arc<CriticalRadiusField>) -> Result<f64> {
    RieszOperator::new(cfg.clone(), field)?.apply(f, u)
}

/// Grid for tables of cylindrically symmetric functions: `ln(|u|/R)` and
/// the latitude `β = asin(|t|/|u|²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableGrid {
    pub log_min: f64,
    pub log_max: f64,
    pub log_points: usize,
    pub latitudes: usize,
}

impl Default for TableGrid {
    fn default() -> Self {
        Self { log_min: (1e-3f64).ln(), log_max: (1e3f64).ln(), log_points: 96, latitudes: 13 }
    }
}

/// Bicubic table of a function of `(|z|, |t|)` over `TableGrid`, scaled by `R`.
#[derive(Clone, Debug)]
pub struct SymmetricTable {
    n: usize,
    scale: f64,
    grid: TableGrid,
    values: Vec<f64>,
}

fn meridian_point(n: usize, beta: f64) -> HPoint {
    let mut c = vec![0.0; 2 * n + 1];
    c[0] = beta.cos().max(0.0).sqrt();
    c[2 * n] = beta.sin();
    HPoint::from_coords(c).expect("finite meridian point")
}

impl SymmetricTable {
    pub fn build<F>(n: usize, scale: f64, grid: TableGrid, f: F) -> Result<Self>
    where
        F: Fn(&HPoint) -> Result<f64> + Sync,
    {
        if grid.log_points < 4 || grid.latitudes < 4 || !(grid.log_max > grid.log_min) || !(scale > 0.0) {
            return Err(invalid("table grid", "need at least 4 points per axis and a positive scale"));
        }
        let (nl, nb) = (grid.log_points, grid.latitudes);
        let values = (0..nl * nb)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / nb, k % nb);
                let ell = grid.log_min + (grid.log_max - grid.log_min) * i as f64 / (nl - 1) as f64;
                let beta = 0.5 * PI * j as f64 / (nb - 1) as f64;
                f(&meridian_point(n, beta).dilate(scale * ell.exp()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, scale, grid, values })
    }

    /// Interpolated value, `None` beyond the outer radius.
    pub fn eval(&self, u: &HPoint) -> Option<f64> {
        let r = u.norm();
        let g = &self.grid;
        let ell = if r > 0.0 { (r / self.scale).ln().max(g.log_min) } else { g.log_min };
        if ell > g.log_max {
            return None;
        }
        let beta = if r > 0.0 { (u.t().abs() / (r * r)).min(1.0).asin() } else { 0.0 };
        let (nl, nb) = (g.log_points, g.latitudes);
        let fi = (ell - g.log_min) / (g.log_max - g.log_min) * (nl - 1) as f64;
        let fj = beta / (0.5 * PI) * (nb - 1) as f64;
        let (i, j) = (fi.floor() as isize, fj.floor() as isize);
        let (wi, wj) = (catmull_rom(fi - i as f64), catmull_rom(fj - j as f64));
        let mut log_ok = true;
        let (mut acc, mut acc_log) = (0.0, 0.0);
        for (a, wa) in wi.iter().enumerate() {
            let ii = (i + a as isize - 1).clamp(0, nl as isize - 1) as usize;
            for (b, wb) in wj.iter().enumerate() {
                // even in β at both ends of [0, π/2]
                let mut jj = j + b as isize - 1;
                if jj < 0 {
                    jj = -jj;
                }
                if jj > nb as isize - 1 {
                    jj = 2 * (nb as isize - 1) - jj;
                }
                let v = self.values[ii * nb + jj as usize];
                acc += wa * wb * v;
                if v > 0.0 {
                    acc_log += wa * wb * v.ln();
                } else {
                    log_ok = false;
                }
            }
        }
        Some(if log_ok { acc_log.exp() } else { acc })
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

fn catmull_rom(x: f64) -> [f64; 4] {
    let (x2, x3) = (x * x, x * x * x);
    [
        -0.5 * x3 + x2 - 0.5 * x,
        1.5 * x3 - 2.5 * x2 + 1.0,
        -1.5 * x3 + 2.0 * x2 + 0.5 * x,
        0.5 * x3 - 0.5 * x2,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaximalConfig {
    pub n_damping: f64,
    pub radii: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub classical: bool,
    /// Unit-ball template size for ball averages.
    pub samples: usize,
    pub seed: u64,
}

impl Default for MaximalConfig {
    fn default() -> Self {
        Self { n_damping: 0.0, radii: 48, r_min: 1e-2, r_max: 1e2, classical: false, samples: 1024, seed: 0x3a }
    }
}

impl MaximalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radii == 0 || !(self.r_min > 0.0 && self.r_max > self.r_min) {
            return Err(invalid("radius grid", "need a positive increasing grid"));
        }
        if !(self.n_damping >= 0.0) {
            return Err(invalid("N", "must be nonnegative"));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalValue {
    pub value: f64,
    pub radius: f64,
}

/// `M_{ρ,N} f(u) = max_r [1+r/ρ(u)]^{-N} |B(u,r)|^{-1} ∫_{B(u,r)} |f|` over a
/// log-spaced radius grid (a lower bound of the supremum).
pub struct MaximalOperator {
    cfg: MaximalConfig,
    field: Arc<CriticalRadiusField>,
    radii: Vec<f64>,
    template: Vec<HPoint>,
}

impl MaximalOperator {
    pub fn new(cfg: MaximalConfig, field: Arc<CriticalRadiusField>) -> Result<Self> {
        cfg.validate()?;
        let radii = geometric_grid(cfg.r_min, cfg.r_max, cfg.radii);
        let template = unit_ball_samples(field.n(), cfg.samples, cfg.seed, 0x4d);
        Ok(Self { cfg, field, radii, template })
    }

    pub fn config(&self) -> &MaximalConfig {
        &self.cfg
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn apply_detailed(&self, f: &SampledFunction, u: &HPoint) -> Result<MaximalValue> {
        let mut best = MaximalValue { value: 0.0, radius: self.radii[0] };
        let m = self.template.len() as f64;
        for &r in &self.radii {
            let avg = self.template.iter().map(|w| f.eval(&u.mul(&w.dilate(r))).abs()).sum::<f64>() / m;
            let weight = if self.cfg.classical { 1.0 } else { self.field.bracket(u, r, -self.cfg.n_damping)? };
            let v = weight * avg;
            if v > best.value {
                best = MaximalValue { value: v, radius: r };
            }
        }
        Ok(best)
    }

    pub fn apply(&self, f: &SampledFunction, u: &HPoint) -> Result<f64> {
        self.apply_detailed(f, u).map(|m| m.value)
    }

    /// `M_{ρ,N} f` as a function; tabulated for cylindrically symmetric `f`
    /// whose support (if any) is centered at the origin.
    pub fn transform(self: &Arc<Self>, f: &SampledFunction) -> Result<SampledFunction> {
        let label = format!("M[{}]", f.label());
        let op = self.clone();
        let g = f.clone();
        let direct = move |u: &HPoint| op.apply(&g, u).unwrap_or(f64::NAN);
        let scale = match f.support() {
            Some(s) if s.center.is_origin() => Some(s.radius),
            Some(_) => None,
            None => Some(1.0),
        };
        match scale {
            Some(scale) if f.symmetry() == Symmetry::Cylindrical && symmetric_field(&self.field) => {
                let op = self.clone();
                let g = f.clone();
                let table = Arc::new(SymmetricTable::build(f.n(), scale, TableGrid::default(), |u| op.apply(&g, u))?);
                Ok(SampledFunction::new(label, f.n(), move |u| table.eval(u).unwrap_or_else(|| direct(u)))
                    .with_symmetry(Symmetry::Cylindrical))
            }
            _ => Ok(SampledFunction::new(label, f.n(), direct)),
        }
    }
}

/// `ρ` depends on `u` only through `(|z|, |t|)`.
fn symmetric_field(field: &CriticalRadiusField) -> bool {
    use crate::potential::PotentialKind;
    field.is_classical()
        || matches!(field.potential().kind(), PotentialKind::Zero | PotentialKind::Constant { .. } | PotentialKind::GaugePower { .. })
}

/// `M_{ρ,N} f(u)`.
pub fn maximal_apply(f: &SampledFunction, u: &HPoint, cfg: &MaximalConfig, field: Arc<CriticalRadiusField>) -> Result<f64> {
    MaximalOperator::new(cfg.clone(), field)?.apply(f, u)
}

/// Exponents of the Hedberg bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HedbergParams {
    pub alpha: f64,
    pub p: f64,
    pub kappa: f64,
    pub theta: f64,
    pub n_damping: f64,
}

impl HedbergParams {
    /// `q` from `1/q = 1/p − α/(Q(1−κ))`, after checking the hypotheses.
    pub fn derived_q(&self, n: usize) -> Result<f64> {
        let q_dim = homogeneous_dimension(n) as f64;
        if !(self.p >= 1.0 && self.p < q_dim / self.alpha) {
            return Err(Error::ExponentRelation(format!("need 1 ≤ p < Q/α = {}", q_dim / self.alpha)));
        }
        let upper = 1.0 - self.alpha * self.p / q_dim;
        if !(self.kappa > 0.0 && self.kappa < upper) {
            return Err(Error::ExponentRelation(format!("need 0 < κ < 1 − αp/Q = {upper}")));
        }
        if self.theta > self.n_damping {
            return Err(Error::ExponentRelation("need θ ≤ N".into()));
        }
        Ok(1.0 / (1.0 / self.p - self.alpha / (q_dim * (1.0 - self.kappa))))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HedbergPoint {
    pub u: HPoint,
    pub lhs: f64,
    pub maximal: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `σ` from `σ^{Q(1−κ)/p} = ‖f‖ / M f(u)`.
    pub sigma_closed: f64,
    /// `σ` minimizing `σ^α M f(u) + σ^{α−Q(1−κ)/p} ‖f‖` by golden section.
    pub sigma_search: f64,
    pub two_term_closed: f64,
    pub two_term_search: f64,
    /// Operator integral split at `σ_closed`: `|v⁻¹u| < σ` and `≥ σ`.
    pub inner: f64,
    pub outer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HedbergReport {
    pub q: f64,
    pub morrey_norm: f64,
    pub morrey_maximizer: HBall,
    pub max_ratio: f64,
    pub points: Vec<HedbergPoint>,
}

/// Both sides of `|I_α f(u)| ≲ [M_{ρ,N} f(u)]^{p/q} ‖f‖^{1−p/q}` at `points`.
pub fn hedberg_check(
    f: &SampledFunction,
    points: &[HPoint],
    params: &HedbergParams,
    riesz: &RieszOperator,
    maximal: &MaximalOperator,
    family: &BallFamily,
) -> Result<HedbergReport> {
    let n = f.n();
    let q = params.derived_q(n)?;
    let q_dim = homogeneous_dimension(n) as f64;
    let space = SpaceParams::morrey(params.p, params.kappa, params.theta);
    let norm: NormEstimate = morrey_norm(f, &space, family, riesz.field())?;
    let m = norm.value;
    let e = q_dim * (1.0 - params.kappa) / params.p;
    let a = params.alpha;
    let points: Vec<HedbergPoint> = points
        .par_iter()
        .map(|u| -> Result<HedbergPoint> {
            let lhs = riesz.apply(f, u)?.abs();
            let mf = maximal.apply(f, u)?;
            let rhs = if mf > 0.0 && m > 0.0 { mf.powf(params.p / q) * m.powf(1.0 - params.p / q) } else { 0.0 };
            let ratio = if lhs == 0.0 { 0.0 } else if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
            let two = |s: f64| s.powf(a) * mf + s.powf(a - e) * m;
            let (sigma_closed, sigma_search) = if mf > 0.0 && m > 0.0 {
                let sc = (m / mf).powf(1.0 / e);
                let (ls, _) = golden_max(|l| -two(l.exp()), sc.ln() - 10.0, sc.ln() + 10.0, 120);
                (sc, ls.exp())
            } else {
                (0.0, 0.0)
            };
            let (inner, outer) = if sigma_closed > 0.0 { riesz.apply_split(f, u, sigma_closed)? } else { (0.0, 0.0) };
            Ok(HedbergPoint {
                u: u.clone(),
                lhs,
                maximal: mf,
                rhs,
                ratio,
                sigma_closed,
                sigma_search,
                two_term_closed: if sigma_closed > 0.0 { two(sigma_closed) } else { 0.0 },
                two_term_search: if sigma_search > 0.0 { two(sigma_search) } else { 0.0 },
                inner,
                outer,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(HedbergReport { q, morrey_norm: m, morrey_maximizer: norm.maximizer, max_ratio, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgroup::unit_ball_volume;

    fn classical() -> Arc<CriticalRadiusField> {
        Arc::new(CriticalRadiusField::classical(1))
    }

    #[test]
    fn surrogate_at_center_of_indicator() {
        let f = SampledFunction::indicator(HBall::centered(1, 1.0).unwrap());
        for alpha in [1.0, 2.0] {
            let cfg = FracIntegralConfig { alpha, ..FracIntegralConfig::default() };
            let v = riesz_apply(&f, &HPoint::origin(1), &cfg, classical()).unwrap();
            let exact = 4.0 * unit_ball_volume(1) / alpha;
            assert!((v / exact - 1.0).abs() < 1e-3, "{v} vs {exact}");
        }
        let zero = SampledFunction::zero(1).with_support(HBall::centered(1, 1.0).unwrap());
        assert_eq!(riesz_apply(&zero, &HPoint::h1(0.3, 0.1, 0.2), &FracIntegralConfig::default(), classical()).unwrap(), 0.0);
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let f = SampledFunction::indicator(HBall::centered(1, 1.0).unwrap());
        let op = Arc::new(RieszOperator::new(FracIntegralConfig::default(), classical()).unwrap());
        let g = op.transform(&f).unwrap();
        for u in [HPoint::h1(0.3, 0.2, 0.1), HPoint::h1(1.2, -0.4, 0.7), HPoint::h1(0.0, 0.0, 2.0), HPoint::h1(5.0, 1.0, 3.0)] {
            let (a, b) = (g.eval(&u), op.apply(&f, &u).unwrap());
            assert!((a / b - 1.0).abs() < 2e-2, "{u}: {a} vs {b}");
        }
    }

    #[test]
    fn maximal_examples() {
        let f = SampledFunction::indicator(HBall::centered(1, 1.0).unwrap());
        let cfg = MaximalConfig { classical: true, samples: 512, ..MaximalConfig::default() };
        assert_eq!(maximal_apply(&f, &HPoint::origin(1), &cfg, classical()).unwrap(), 1.0);
        let far = maximal_apply(&f, &HPoint::h1(2.0, 0.0, 0.0), &cfg, classical()).unwrap();
        assert!((3f64.powi(-4)..=1.0).contains(&far), "{far}");
    }

    #[test]
    fn hedberg_exponents() {
        let p = HedbergParams { alpha: 1.0, p: 2.0, kappa: 0.25, theta: 0.0, n_damping: 1.0 };
        assert!((p.derived_q(1).unwrap() - 6.0).abs() < 1e-12);
        let bad = HedbergParams { kappa: 0.6, ..p.clone() };
        assert!(matches!(bad.derived_q(1), Err(Error::ExponentRelation(_))));
        let bad = HedbergParams { theta: 2.0, ..p };
        assert!(bad.derived_q(1).is_err());
    }
}
