//! Morrey, weak Morrey, BMO and Campanato norm estimators with the
//! critical-radius weight `[1 + r/ρ(u₀)]^{-θ}`.
//!
//! Every estimate is a supremum over a finite ball family, so it is a lower
//! bound of the true norm. Each ball carries its own seeded sample template;
//! the mean and the oscillation share it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fit::geometric_grid;
use crate::hgroup::{homogeneous_dimension, HBall, HPoint};
use crate::measure::{stream_rng, unit_ball_samples, SampledFunction};
use crate::potential::CriticalRadiusField;
use crate::quad::nelder_mead_max;

use rand::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpaceParams {
    pub p: f64,
    pub kappa: f64,
    pub theta: f64,
    /// Campanato order; `0` is BMO.
    pub beta: f64,
    /// Drop the bracket factor (`V ≡ 0`).
    pub classical: bool,
}

impl Default for SpaceParams {
    fn default() -> Self {
        Self { p: 1.0, kappa: 0.0, theta: 0.0, beta: 0.0, classical: false }
    }
}

impl SpaceParams {
    pub fn morrey(p: f64, kappa: f64, theta: f64) -> Self {
        Self { p, kappa, theta, ..Self::default() }
    }

    pub fn classical(mut self) -> Self {
        self.classical = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(invalid("p", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.kappa) {
            return Err(invalid("kappa", "must lie in [0, 1)"));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(invalid("theta", "must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(invalid("beta", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallRefine {
    pub starts: usize,
    pub iterations: usize,
    /// Largest center move, in units of the starting radius.
    pub max_shift: f64,
}

impl Default for BallRefine {
    fn default() -> Self {
        Self { starts: 4, iterations: 120, max_shift: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyConfig {
    pub include_origin: bool,
    pub support_centers: usize,
    pub random_centers: usize,
    /// Random centers are drawn from `[-w, w]^{2n} × [-w², w²]`.
    pub box_half_width: f64,
    pub radii: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub samples_per_ball: usize,
    pub seed: u64,
    pub refine: Option<BallRefine>,
}

impl Default for FamilyConfig {
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
            seed: 0xba11,
            refine: Some(BallRefine::default()),
        }
    }
}

/// Centers × radii with per-ball sample templates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    n: usize,
    centers: Vec<HPoint>,
    radii: Vec<f64>,
    samples_per_ball: usize,
    seed: u64,
    refine: Option<BallRefine>,
}

impl BallFamily {
    /// Origin, points of `support` (when given) and seeded random centers.
    pub fn build(n: usize, support: Option<&HBall>, cfg: &FamilyConfig) -> Result<Self> {
        if cfg.radii == 0 || !(cfg.r_min > 0.0 && cfg.r_max >= cfg.r_min) {
            return Err(invalid("radii", "need at least one radius and 0 < r_min ≤ r_max"));
        }
        if cfg.samples_per_ball == 0 {
            return Err(invalid("samples_per_ball", "must be positive"));
        }
        let mut centers = Vec::new();
        if cfg.include_origin {
            centers.push(HPoint::origin(n));
        }
        if let Some(b) = support {
            centers.extend(unit_ball_samples(n, cfg.support_centers, cfg.seed, 0x5c).iter().map(|w| b.map_from_unit(w)));
        }
        let mut rng = stream_rng(cfg.seed, 0x5d);
        let w = cfg.box_half_width;
        for _ in 0..cfg.random_centers {
            let mut c: Vec<f64> = (0..2 * n).map(|_| w * (2.0 * rng.random::<f64>() - 1.0)).collect();
            c.push(w * w * (2.0 * rng.random::<f64>() - 1.0));
            centers.push(HPoint::from_coords(c)?);
        }
        if centers.is_empty() {
            return Err(invalid("centers", "family has no centers"));
        }
        Ok(Self {
            n,
            centers,
            radii: geometric_grid(cfg.r_min, cfg.r_max, cfg.radii),
            samples_per_ball: cfg.samples_per_ball,
            seed: cfg.seed,
            refine: cfg.refine,
        })
    }

    /// Family from explicit centers and radii.
    pub fn explicit(centers: Vec<HPoint>, radii: Vec<f64>, samples_per_ball: usize, seed: u64) -> Result<Self> {
        let n = centers.first().map(|c| c.n()).ok_or_else(|| invalid("centers", "empty"))?;
        if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("radii", "must be positive and increasing"));
        }
        Ok(Self { n, centers, radii, samples_per_ball, seed, refine: None })
    }

    pub fn with_refine(mut self, refine: Option<BallRefine>) -> Self {
        self.refine = refine;
        self
    }

    /// `δ_a` image: centers dilated, radii scaled, templates unchanged.
    pub fn image(&self, a: f64) -> Self {
        Self {
            centers: self.centers.iter().map(|c| c.dilate(a)).collect(),
            radii: self.radii.iter().map(|r| r * a).collect(),
            ..self.clone()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn centers(&self) -> &[HPoint] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.centers.len() * self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ball(&self, index: usize) -> HBall {
        let (c, r) = (index / self.radii.len(), index % self.radii.len());
        HBall { center: self.centers[c].clone(), radius: self.radii[r] }
    }

    /// Unit-ball template of ball `index`.
    pub fn template(&self, index: usize) -> Vec<HPoint> {
        unit_ball_samples(self.n, self.samples_per_ball, self.seed, 0x1000 + index as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Morrey,
    WeakMorrey,
    Bmo,
    Campanato,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallValue {
    pub center: HPoint,
    pub radius: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub kind: NormKind,
    pub value: f64,
    pub maximizer: HBall,
    /// Monte-Carlo standard error of the maximizing ball's value.
    pub stderr: f64,
    pub per_ball: Vec<BallValue>,
    /// Largest value over centers at each family radius.
    pub per_radius: Vec<(f64, f64)>,
    /// The per-radius curve still increases at the largest radius.
    pub divergent: bool,
    pub refined: bool,
}

/// Statistic of one ball from the sampled values of `f` on it.
fn ball_statistic(kind: NormKind, params: &SpaceParams, ball_volume: f64, q: f64, values: &mut [f64]) -> (f64, f64) {
    let m = values.len() as f64;
    match kind {
        NormKind::Morrey => {
            let g: Vec<f64> = values.iter().map(|v| v.abs().powf(params.p)).collect();
            let mean = g.iter().sum::<f64>() / m;
            let var = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            let value = (ball_volume.powf(1.0 - params.kappa) * mean).powf(1.0 / params.p);
            let se = if mean > 0.0 { value / params.p * (var / m).sqrt() / mean } else { 0.0 };
            (value, se)
        }
        NormKind::WeakMorrey => {
            for v in values.iter_mut() {
                *v = v.abs();
            }
            values.sort_by(|a, b| b.total_cmp(a));
            let mut best = 0.0f64;
            let mut k = 0;
            while k < values.len() {
                let lambda = values[k];
                let mut j = k;
                while j + 1 < values.len() && values[j + 1] == lambda {
                    j += 1;
                }
                let frac = (j + 1) as f64 / m;
                best = best.max(lambda * (frac * ball_volume).powf(1.0 / params.p));
                k = j + 1;
            }
            (best * ball_volume.powf(-params.kappa / params.p), 0.0)
        }
        NormKind::Bmo | NormKind::Campanato => {
            let mean = values.iter().sum::<f64>() / m;
            let dev: Vec<f64> = values.iter().map(|v| (v - mean).abs()).collect();
            let osc = dev.iter().sum::<f64>() / m;
            let var = dev.iter().map(|d| (d - osc).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            let scale = if kind == NormKind::Campanato { ball_volume.powf(-params.beta / q) } else { 1.0 };
            (scale * osc, scale * (var / m).sqrt())
        }
    }
}

struct BallEvaluator<'a> {
    kind: NormKind,
    f: &'a SampledFunction,
    params: &'a SpaceParams,
    field: &'a CriticalRadiusField,
    q: f64,
}

impl BallEvaluator<'_> {
    fn eval(&self, ball: &HBall, template: &[HPoint]) -> Result<(f64, f64)> {
        let (mut values, share) = match self.f.support() {
            // sample the smaller of support and ball; Morrey statistics only see ∫_B |f|^p
            Some(s) if matches!(self.kind, NormKind::Morrey | NormKind::WeakMorrey) && s.volume() < ball.volume() => {
                let values: Vec<f64> = template
                    .iter()
                    .map(|w| {
                        let x = s.map_from_unit(w);
                        if ball.contains(&x) {
                            self.f.eval(&x)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                (values, (s.volume() / ball.volume()).powf(1.0 / self.params.p))
            }
            _ => (template.iter().map(|w| self.f.eval(&ball.map_from_unit(w))).collect(), 1.0),
        };
        let (v, se) = ball_statistic(self.kind, self.params, ball.volume(), self.q, &mut values);
        let (v, se) = (share * v, share * se);
        let weight = if self.params.classical || self.params.theta == 0.0 {
            1.0
        } else {
            self.field.bracket(&ball.center, ball.radius, -self.params.theta)?
        };
        Ok((weight * v, weight * se))
    }
}

/// Supremum estimate of the `kind` norm of `f` over `family`.
pub fn estimate_norm(
    kind: NormKind,
    f: &SampledFunction,
    params: &SpaceParams,
    family: &BallFamily,
    field: &CriticalRadiusField,
) -> Result<NormEstimate> {
    params.validate()?;
    if f.n() != family.n() {
        return Err(crate::Error::DimensionMismatch { left: f.n(), right: family.n() });
    }
    let q = homogeneous_dimension(family.n()) as f64;
    let ev = BallEvaluator { kind, f, params, field, q };
    let results: Vec<(f64, f64)> = (0..family.len())
        .into_par_iter()
        .map(|i| ev.eval(&family.ball(i), &family.template(i)))
        .collect::<Result<Vec<_>>>()?;

    let mut per_ball: Vec<BallValue> = (0..family.len())
        .map(|i| {
            let b = family.ball(i);
            BallValue { center: b.center, radius: b.radius, value: results[i].0 }
        })
        .collect();
    let nr = family.radii().len();
    // sup over centers at each radius, with the standard error of its ball
    let radius_sup: Vec<(f64, f64)> = (0..nr)
        .map(|k| {
            (0..family.centers().len())
                .map(|c| results[c * nr + k])
                .fold((0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc })
        })
        .collect();
    let per_radius: Vec<(f64, f64)> = radius_sup.iter().enumerate().map(|(k, x)| (family.radii()[k], x.0)).collect();
    // an increase counts only when it exceeds the sampling noise of both ends
    let divergent = nr >= 2 && {
        let ((a, sa), (b, sb)) = (radius_sup[nr - 2], radius_sup[nr - 1]);
        b > 0.0 && b - a > (a * 1e-9).max(2.0 * (sa + sb))
    };

    let mut best = (0..results.len()).max_by(|&i, &j| results[i].0.total_cmp(&results[j].0).then(j.cmp(&i))).unwrap_or(0);
    let mut value = results[best].0;
    let mut stderr = results[best].1;
    let mut maximizer = family.ball(best);
    let mut refined = false;

    if let Some(rf) = family.refine.filter(|r| r.starts > 0 && value > 0.0) {
        let mut order: Vec<usize> = (0..results.len()).collect();
        order.sort_by(|&i, &j| results[j].0.total_cmp(&results[i].0).then(i.cmp(&j)));
        let (r_lo, r_hi) = (family.radii()[0], family.radii()[nr - 1]);
        let dim = 2 * family.n() + 1;
        let outcomes: Vec<Option<(HBall, f64, f64)>> = order
            .iter()
            .take(rf.starts)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&&i| {
                let start = family.ball(i);
                let template = family.template(i);
                let ball_at = |x: &[f64]| -> Option<HBall> {
                    let xi = HPoint::from_coords(x[..dim].to_vec()).ok()?;
                    let s = xi.norm();
                    let xi = if s > rf.max_shift { xi.dilate(rf.max_shift / s) } else { xi };
                    let r = (start.radius * x[dim].exp()).clamp(r_lo, r_hi);
                    Some(HBall { center: start.center.mul(&xi.dilate(start.radius)), radius: r })
                };
                let objective = |x: &[f64]| ball_at(x).and_then(|b| ev.eval(&b, &template).ok()).map_or(f64::NEG_INFINITY, |v| v.0);
                let mut step = vec![0.25; dim];
                step.push(0.25);
                let (x, _) = nelder_mead_max(objective, &vec![0.0; dim + 1], &step, rf.iterations);
                let b = ball_at(&x)?;
                let (v, se) = ev.eval(&b, &template).ok()?;
                Some((b, v, se))
            })
            .collect();
        for (b, v, se) in outcomes.into_iter().flatten() {
            per_ball.push(BallValue { center: b.center.clone(), radius: b.radius, value: v });
            if v > value {
                value = v;
                stderr = se;
                maximizer = b;
                refined = true;
                best = per_ball.len() - 1;
            }
        }
    }
    let _ = best;
    Ok(NormEstimate { kind, value, maximizer, stderr, per_ball, per_radius, divergent, refined })
}

/// `sup_B [1+r/ρ]^{-θ} (|B|^{-κ} ∫_B |f|^p)^{1/p}`.
pub fn morrey_norm(f: &SampledFunction, params: &SpaceParams, family: &BallFamily, field: &CriticalRadiusField) -> Result<NormEstimate> {
    estimate_norm(NormKind::Morrey, f, params, family, field)
}

/// `sup_B [1+r/ρ]^{-θ} |B|^{-κ/p} sup_λ λ |{u ∈ B : |f(u)| > λ}|^{1/p}`.
pub fn weak_morrey_norm(f: &SampledFunction, params: &SpaceParams, family: &BallFamily, field: &CriticalRadiusField) -> Result<NormEstimate> {
    estimate_norm(NormKind::WeakMorrey, f, params, family, field)
}

/// `sup_B [1+r/ρ]^{-θ} |B|^{-1} ∫_B |f − f_B|`.
pub fn bmo_norm(f: &SampledFunction, theta: f64, classical: bool, family: &BallFamily, field: &CriticalRadiusField) -> Result<NormEstimate> {
    let params = SpaceParams { theta, classical, ..SpaceParams::default() };
    estimate_norm(NormKind::Bmo, f, &params, family, field)
}

/// `sup_B [1+r/ρ]^{-θ} |B|^{-(1+β/Q)} ∫_B |f − f_B|`.
pub fn campanato_norm(
    f: &SampledFunction,
    beta: f64,
    theta: f64,
    classical: bool,
    family: &BallFamily,
    field: &CriticalRadiusField,
) -> Result<NormEstimate> {
    let params = SpaceParams { theta, beta, classical, ..SpaceParams::default() };
    estimate_norm(NormKind::Campanato, f, &params, family, field)
}

/// Per-ball values of one statistic over explicit balls, sharing the
/// template of the given family index.
pub fn ball_values(
    kind: NormKind,
    f: &SampledFunction,
    params: &SpaceParams,
    balls: &[HBall],
    template: &[HPoint],
    field: &CriticalRadiusField,
) -> Result<Vec<f64>> {
    params.validate()?;
    let q = homogeneous_dimension(f.n()) as f64;
    let ev = BallEvaluator { kind, f, params, field, q };
    balls.par_iter().map(|b| ev.eval(b, template).map(|v| v.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgroup::unit_ball_volume;

    fn small_family(support: Option<&HBall>) -> BallFamily {
        let cfg = FamilyConfig {
            support_centers: 7,
            random_centers: 8,
            radii: 12,
            samples_per_ball: 256,
            ..FamilyConfig::default()
        };
        BallFamily::build(1, support, &cfg).unwrap()
    }

    #[test]
    fn indicator_morrey_norm_is_attained_at_its_ball() {
        let b = HBall::centered(1, 1.0).unwrap();
        let f = SampledFunction::indicator(b.clone());
        let field = CriticalRadiusField::classical(1);
        let est = morrey_norm(&f, &SpaceParams::morrey(2.0, 0.5, 0.0).classical(), &small_family(Some(&b)), &field).unwrap();
        let exact = unit_ball_volume(1).powf(0.25);
        assert!((est.value / exact - 1.0).abs() < 0.02, "{} vs {exact}", est.value);
        assert!(est.maximizer.center.norm() < 0.2 && (est.maximizer.radius - 1.0).abs() < 0.1, "{:?}", est.maximizer);
        assert!(est.per_ball.iter().map(|b| b.value).fold(0.0, f64::max) == est.value);
    }

    #[test]
    fn zero_and_constant_functions() {
        let field = CriticalRadiusField::classical(1);
        let fam = small_family(None);
        let z = morrey_norm(&SampledFunction::zero(1), &SpaceParams::morrey(2.0, 0.5, 0.0), &fam, &field).unwrap();
        assert_eq!(z.value, 0.0);
        let c = SampledFunction::constant(1, 3.0);
        assert_eq!(bmo_norm(&c, 0.0, true, &fam, &field).unwrap().value, 0.0);
        let m = morrey_norm(&c, &SpaceParams::morrey(1.0, 0.5, 0.0).classical(), &fam, &field).unwrap();
        assert!(m.divergent);
    }

    #[test]
    fn weak_is_below_strong_per_ball() {
        let f = SampledFunction::new("osc", 1, |u: &HPoint| (3.0 * u.x()[0]).sin() + u.t());
        let field = CriticalRadiusField::classical(1);
        let fam = small_family(None).with_refine(None);
        let params = SpaceParams::morrey(2.0, 0.25, 0.0);
        let s = morrey_norm(&f, &params, &fam, &field).unwrap();
        let w = weak_morrey_norm(&f, &params, &fam, &field).unwrap();
        for (a, b) in w.per_ball.iter().zip(&s.per_ball) {
            assert!(a.value <= b.value * (1.0 + 1e-12));
        }
    }

    #[test]
    fn campanato_zero_is_bmo() {
        let f = SampledFunction::new("log", 1, |u: &HPoint| u.norm().max(1e-300).ln());
        let field = CriticalRadiusField::classical(1);
        let fam = small_family(None).with_refine(None);
        let a = bmo_norm(&f, 0.0, true, &fam, &field).unwrap();
        let b = campanato_norm(&f, 0.0, 0.0, true, &fam, &field).unwrap();
        assert_eq!(a.per_ball, b.per_ball);
    }
}
