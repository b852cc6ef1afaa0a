//! Fitted constants for the Gaussian heat bound, the localized Schrödinger
//! heat bound, the fractional-kernel majorant and its Lipschitz variant.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::{fit_envelope, geometric_grid, EnvelopeFit, EnvelopeProblem, RefineConfig};
use crate::hgroup::{homogeneous_dimension, HPoint};
use crate::measure::{stream_rng, unit_ball_samples};
use crate::potential::CriticalRadiusField;
use crate::semigroup::heat::HeatTable;
use crate::semigroup::kalpha::{kalpha_eval, majorant_kernel};
use crate::semigroup::trotter::TrotterPropagator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Gaussian,
    LocalizedHeat,
    Majorant,
    Lipschitz,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundReport {
    pub kind: BoundKind,
    /// `C`, `C_N` or `C_{N,α}`.
    pub constant: f64,
    /// Gaussian width `A` where applicable.
    pub width: Option<f64>,
    pub n_damping: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub fit: EnvelopeFit,
}

impl KernelBoundReport {
    /// Worst held-out ratio against the fitted bound.
    pub fn worst_ratio(&self) -> f64 {
        self.fit.held_out_slack
    }

    pub fn holds(&self) -> bool {
        self.fit.holds()
    }
}

/// Sampling design shared by the heat-bound fits: `s` log-uniform in
/// `[s_min, s_max]`, scaled point `δ_{s^{-1/2}}u` uniform in the gauge ball
/// of radius `radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeatSampleDesign {
    pub samples: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub radius: f64,
    pub widths: Vec<f64>,
    pub seed: u64,
    pub refine: RefineConfig,
}

impl Default for HeatSampleDesign {
    fn default() -> Self {
        Self {
            samples: 400,
            s_min: 0.1,
            s_max: 10.0,
            radius: 3.0,
            widths: geometric_grid(0.5, 64.0, 29),
            seed: 0x6b65,
            refine: RefineConfig::default(),
        }
    }
}

impl HeatSampleDesign {
    fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(invalid("samples", "need at least 2 samples"));
        }
        if !(self.s_min > 0.0 && self.s_max >= self.s_min) {
            return Err(invalid("s range", "need 0 < s_min ≤ s_max"));
        }
        if !(self.radius > 0.0) {
            return Err(invalid("radius", "must be positive"));
        }
        Ok(())
    }

    /// `(s, u)` samples, split into calibration and held-out halves.
    pub fn samples(&self, n: usize) -> (Vec<(f64, HPoint)>, Vec<(f64, HPoint)>) {
        let zetas = unit_ball_samples(n, self.samples, self.seed, 11);
        let mut rng = stream_rng(self.seed, 12);
        let (a, b) = (self.s_min.ln(), self.s_max.ln());
        let all: Vec<(f64, HPoint)> = zetas
            .into_iter()
            .map(|z| {
                let s = (a + (b - a) * rng.random::<f64>()).exp();
                (s, z.dilate(self.radius).dilate(s.sqrt()))
            })
            .collect();
        let half = all.len() / 2;
        let held = all[half..].to_vec();
        let mut cal = all;
        cal.truncate(half);
        (cal, held)
    }
}

fn to_scaled(s: f64, u: &HPoint) -> Vec<f64> {
    let z = u.dilate(1.0 / s.sqrt());
    let mut x = Vec::with_capacity(1 + z.coords().len());
    x.push(s.ln());
    x.extend_from_slice(z.coords());
    x
}

fn clamp_scaled(x: &mut [f64], s_min: f64, s_max: f64, radius: f64) {
    x[0] = x[0].clamp(s_min.ln(), s_max.ln());
    if let Ok(z) = HPoint::from_coords(x[1..].to_vec()) {
        let r = z.norm();
        if r > radius {
            let c = z.dilate(radius / r);
            x[1..].copy_from_slice(c.coords());
        }
    }
}

struct GaussianProblem<'a> {
    table: &'a HeatTable,
    design: &'a HeatSampleDesign,
}

impl EnvelopeProblem for GaussianProblem<'_> {
    fn measured(&self, x: &[f64]) -> Option<f64> {
        let s = x[0].exp();
        let z = HPoint::from_coords(x[1..].to_vec()).ok()?;
        Some(self.table.hs(s, &z.dilate(s.sqrt())))
    }

    fn envelope(&self, x: &[f64], a: f64) -> f64 {
        let s = x[0].exp();
        let q = homogeneous_dimension(self.table.n()) as f64;
        let z = HPoint::from_coords(x[1..].to_vec()).expect("finite coordinates");
        s.powf(-q / 2.0) * (-z.norm().powi(2) / a).exp()
    }

    fn clamp(&self, x: &mut [f64]) {
        clamp_scaled(x, self.design.s_min, self.design.s_max, self.design.radius);
    }
}

/// Fits `(C, A)` in `H_s(u) ≤ C s^{-Q/2} exp(-|u|²/(As))` on `calibration`,
/// validating on `held_out`.
pub fn gaussian_bound_fit(
    table: &HeatTable,
    calibration: &[(f64, HPoint)],
    held_out: &[(f64, HPoint)],
    design: &HeatSampleDesign,
) -> Result<KernelBoundReport> {
    design.validate()?;
    let problem = GaussianProblem { table, design };
    let cal: Vec<Vec<f64>> = calibration.iter().map(|(s, u)| to_scaled(*s, u)).collect();
    let held: Vec<Vec<f64>> = held_out.iter().map(|(s, u)| to_scaled(*s, u)).collect();
    let fit = fit_envelope(&problem, &cal, &held, &design.widths, design.refine)?;
    Ok(KernelBoundReport {
        kind: BoundKind::Gaussian,
        constant: fit.constant,
        width: Some(fit.shape),
        n_damping: None,
        alpha: None,
        delta: None,
        fit,
    })
}

struct LocalizedProblem<'a> {
    prop: &'a TrotterPropagator,
    field: &'a CriticalRadiusField,
    n_damping: f64,
    design: &'a HeatSampleDesign,
}

impl EnvelopeProblem for LocalizedProblem<'_> {
    fn measured(&self, x: &[f64]) -> Option<f64> {
        let s = x[0].exp();
        let u = HPoint::from_coords(x[1..].to_vec()).ok()?.dilate(s.sqrt());
        let v = HPoint::origin(u.n());
        let p = self.prop.kernel_at(s, &u, &v);
        let (ru, rv) = (self.field.rho(&u).ok()?, self.field.rho(&v).ok()?);
        Some(p * (1.0 + s.sqrt() / ru + s.sqrt() / rv).powf(self.n_damping))
    }

    fn envelope(&self, x: &[f64], a: f64) -> f64 {
        let s = x[0].exp();
        let z = HPoint::from_coords(x[1..].to_vec()).expect("finite coordinates");
        s.powf(-(z.q() as f64) / 2.0) * (-z.norm().powi(2) / a).exp()
    }

    fn clamp(&self, x: &mut [f64]) {
        clamp_scaled(x, self.design.s_min, self.design.s_max, self.design.radius);
    }
}

/// Fits `(C_N, A)` in
/// `P_s(u,v)·[1+√s/ρ(u)+√s/ρ(v)]^N ≤ C_N s^{-Q/2} exp(-|v⁻¹u|²/(As))`
/// with `v` at the origin.
pub fn localized_heat_fit(
    prop: &TrotterPropagator,
    field: &CriticalRadiusField,
    n_damping: f64,
    design: &HeatSampleDesign,
) -> Result<KernelBoundReport> {
    design.validate()?;
    if n_damping < 0.0 {
        return Err(invalid("N", "must be nonnegative"));
    }
    let (cal, held) = design.samples(prop.potential().n());
    let cal: Vec<Vec<f64>> = cal.iter().map(|(s, u)| to_scaled(*s, u)).collect();
    let held: Vec<Vec<f64>> = held.iter().map(|(s, u)| to_scaled(*s, u)).collect();
    let problem = LocalizedProblem { prop, field, n_damping, design };
    let fit = fit_envelope(&problem, &cal, &held, &design.widths, design.refine)?;
    Ok(KernelBoundReport {
        kind: BoundKind::LocalizedHeat,
        constant: fit.constant,
        width: Some(fit.shape),
        n_damping: Some(n_damping),
        alpha: None,
        delta: None,
        fit,
    })
}

/// Point on the unit gauge sphere of `H^1`: `((cos β)^{1/2} e^{iφ}, sin β)`.
pub fn gauge_sphere_point(phi: f64, beta: f64) -> HPoint {
    let r = beta.cos().max(0.0).sqrt();
    HPoint::h1(r * phi.cos(), r * phi.sin(), beta.sin())
}

/// Pair design for the majorant fit (`n = 1`): `u` uniform in a gauge ball,
/// `v⁻¹u = δ_d ω` with `d/ρ(u)` log-uniform in `[ratio_min, ratio_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairDesign {
    pub pairs: usize,
    pub center_radius: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub seed: u64,
    pub refine: RefineConfig,
}

impl Default for PairDesign {
    fn default() -> Self {
        Self { pairs: 400, center_radius: 1.0, ratio_min: 1e-2, ratio_max: 1e2, seed: 0x7768, refine: RefineConfig::default() }
    }
}

struct MajorantProblem<'a> {
    prop: &'a TrotterPropagator,
    field: &'a CriticalRadiusField,
    alpha: f64,
    n_damping: f64,
    design: &'a PairDesign,
}

impl MajorantProblem<'_> {
    fn pair(&self, x: &[f64]) -> Option<(HPoint, HPoint)> {
        let u = HPoint::h1(x[0], x[1], x[2]);
        let rho = if self.field.is_classical() { 1.0 } else { self.field.rho(&u).ok()? };
        let h = gauge_sphere_point(x[4], x[5]).dilate(x[3].exp() * rho);
        Some((u.clone(), u.mul(&h.inv())))
    }
}

impl EnvelopeProblem for MajorantProblem<'_> {
    fn measured(&self, x: &[f64]) -> Option<f64> {
        let (u, v) = self.pair(x)?;
        kalpha_eval(self.alpha, &u, &v, self.prop).ok()
    }

    fn envelope(&self, x: &[f64], _: f64) -> f64 {
        let (u, v) = self.pair(x).expect("pair within domain");
        majorant_kernel(self.alpha, self.n_damping, &u, &v, self.field).unwrap_or(f64::NAN)
    }

    fn clamp(&self, x: &mut [f64]) {
        let u = HPoint::h1(x[0], x[1], x[2]);
        let r = u.norm();
        if r > self.design.center_radius {
            let c = u.dilate(self.design.center_radius / r);
            x[..3].copy_from_slice(c.coords());
        }
        x[3] = x[3].clamp(self.design.ratio_min.ln(), self.design.ratio_max.ln());
        x[5] = x[5].clamp(-PI / 2.0, PI / 2.0);
    }

    fn step(&self, _: &[f64]) -> Vec<f64> {
        vec![0.05, 0.05, 0.05, 0.2, 0.2, 0.1]
    }
}

/// Fits `C_N` in `K_α(u,v) ≤ C_N [1+|v⁻¹u|/ρ(u)]^{-N} |v⁻¹u|^{α-Q}`.
pub fn majorant_fit(
    prop: &TrotterPropagator,
    field: &CriticalRadiusField,
    alpha: f64,
    n_damping: f64,
    design: &PairDesign,
) -> Result<KernelBoundReport> {
    if design.pairs < 2 || !(design.ratio_min > 0.0 && design.ratio_max >= design.ratio_min) {
        return Err(invalid("pair design", "need at least 2 pairs and 0 < ratio_min ≤ ratio_max"));
    }
    if prop.potential().n() != 1 {
        return Err(invalid("n", "pair designs are implemented for n = 1"));
    }
    let centers = unit_ball_samples(1, design.pairs, design.seed, 21);
    let mut rng = stream_rng(design.seed, 22);
    let (a, b) = (design.ratio_min.ln(), design.ratio_max.ln());
    let all: Vec<Vec<f64>> = centers
        .into_iter()
        .map(|c| {
            let c = c.dilate(design.center_radius);
            let l = a + (b - a) * rng.random::<f64>();
            let phi = 2.0 * PI * rng.random::<f64>();
            let beta = PI * (rng.random::<f64>() - 0.5);
            vec![c.x()[0], c.y()[0], c.t(), l, phi, beta]
        })
        .collect();
    let half = all.len() / 2;
    let problem = MajorantProblem { prop, field, alpha, n_damping, design };
    let fit = fit_envelope(&problem, &all[..half], &all[half..], &[1.0], design.refine)?;
    Ok(KernelBoundReport {
        kind: BoundKind::Majorant,
        constant: fit.constant,
        width: None,
        n_damping: Some(n_damping),
        alpha: Some(alpha),
        delta: None,
        fit,
    })
}

/// Smallest admissible `|v⁻¹u| / |w⁻¹u|` for Lipschitz samples; below it the
/// kernel difference is dominated by quadrature noise.
pub const LIPSCHITZ_FLOOR: f64 = 1e-2;

struct LipschitzProblem<'a> {
    prop: &'a TrotterPropagator,
    field: &'a CriticalRadiusField,
    alpha: f64,
    n_damping: f64,
    delta: f64,
}

fn triple(x: &[f64]) -> (HPoint, HPoint, HPoint) {
    (HPoint::h1(x[0], x[1], x[2]), HPoint::h1(x[3], x[4], x[5]), HPoint::h1(x[6], x[7], x[8]))
}

impl EnvelopeProblem for LipschitzProblem<'_> {
    fn measured(&self, x: &[f64]) -> Option<f64> {
        let (u, v, w) = triple(x);
        if u == v {
            return Some(0.0);
        }
        let (near, far) = (u.distance(&v), u.distance(&w));
        if !(near <= far / 2.0 && near >= LIPSCHITZ_FLOOR * far) {
            return None;
        }
        let a = kalpha_eval(self.alpha, &u, &w, self.prop).ok()?;
        let b = kalpha_eval(self.alpha, &v, &w, self.prop).ok()?;
        Some((a - b).abs())
    }

    fn envelope(&self, x: &[f64], _: f64) -> f64 {
        let (u, v, w) = triple(x);
        let q = homogeneous_dimension(1) as f64;
        let (near, far) = (u.distance(&v), u.distance(&w));
        let bracket = self.field.bracket(&u, far, -self.n_damping).unwrap_or(f64::NAN);
        bracket * near.powf(self.delta) / far.powf(q - self.alpha + self.delta)
    }
}

/// Fits `C_{N,α}` in
/// `|K_α(u,w) − K_α(v,w)| ≤ C [1+|w⁻¹u|/ρ(u)]^{-N} |v⁻¹u|^δ / |w⁻¹u|^{Q-α+δ}`
/// on the first half of `triples`, validating on the second half.
pub fn lipschitz_kernel_check(
    alpha: f64,
    n_damping: f64,
    triples: &[(HPoint, HPoint, HPoint)],
    delta: f64,
    field: &CriticalRadiusField,
    prop: &TrotterPropagator,
    refine: RefineConfig,
) -> Result<KernelBoundReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid("delta", "must lie in (0, 1]"));
    }
    if triples.len() < 2 {
        return Err(invalid("triples", "need at least 2 triples"));
    }
    for (u, v, w) in triples {
        if u.n() != 1 || v.n() != 1 || w.n() != 1 {
            return Err(invalid("triples", "Lipschitz checks are implemented for n = 1"));
        }
        if u.distance(v) > u.distance(w) / 2.0 {
            return Err(Error::Hypothesis(format!("triple ({u}, {v}, {w}) violates |v⁻¹u| ≤ |w⁻¹u|/2")));
        }
    }
    let coords: Vec<Vec<f64>> = triples
        .iter()
        .map(|(u, v, w)| u.coords().iter().chain(v.coords()).chain(w.coords()).copied().collect())
        .collect();
    let half = coords.len() / 2;
    let problem = LipschitzProblem { prop, field, alpha, n_damping, delta };
    let fit = fit_envelope(&problem, &coords[..half], &coords[half..], &[1.0], refine)?;
    Ok(KernelBoundReport {
        kind: BoundKind::Lipschitz,
        constant: fit.constant,
        width: None,
        n_damping: Some(n_damping),
        alpha: Some(alpha),
        delta: Some(delta),
        fit,
    })
}

/// Admissible triples with `w` at the origin, `|u| = 1` and `v = u·h⁻¹`,
/// `|h|/|u| ∈ [LIPSCHITZ_FLOOR, 1/2]` drawn uniformly from the gauge ball.
pub fn lipschitz_triples(count: usize, seed: u64) -> Vec<(HPoint, HPoint, HPoint)> {
    let mut rng = stream_rng(seed, 31);
    let mut out = Vec::with_capacity(count);
    let hs = unit_ball_samples(1, 4 * count + 64, seed, 32);
    let mut hs = hs.into_iter().map(|h| h.dilate(0.5)).filter(|h| h.norm() >= LIPSCHITZ_FLOOR);
    while out.len() < count {
        let u = gauge_sphere_point(2.0 * PI * rng.random::<f64>(), PI * (rng.random::<f64>() - 0.5));
        let h = hs.next().expect("enough ball samples");
        let v = u.mul(&h.inv());
        out.push((u, v, HPoint::origin(1)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Potential, RhoSearch};
    use crate::measure::QuadratureSpec;
    use crate::semigroup::trotter::TrotterConfig;

    fn prop(p: Potential) -> TrotterPropagator {
        TrotterPropagator::new(p, TrotterConfig { per_axis: 2, ..TrotterConfig::default() }).unwrap()
    }

    #[test]
    fn gaussian_bound_at_origin_is_h1_of_zero() {
        let table = HeatTable::shared(1);
        let cal: Vec<(f64, HPoint)> = [0.5, 1.0, 2.0].iter().map(|&s| (s, HPoint::origin(1))).collect();
        let design = HeatSampleDesign {
            widths: vec![1.0, 4.0],
            refine: RefineConfig { starts: 0, ..RefineConfig::default() },
            ..HeatSampleDesign::default()
        };
        let rep = gaussian_bound_fit(&table, &cal, &cal, &design).unwrap();
        assert!((rep.constant - 0.0625).abs() < 1e-6, "{rep:?}");
        assert!(rep.holds());
    }

    #[test]
    fn sphere_points_have_unit_gauge() {
        for (phi, beta) in [(0.0, 0.0), (1.0, 0.7), (3.0, -1.2), (5.0, PI / 2.0)] {
            assert!((gauge_sphere_point(phi, beta).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn triples_are_admissible_and_checked() {
        let t = lipschitz_triples(20, 3);
        assert!(t.iter().all(|(u, v, w)| u.distance(v) <= u.distance(w) / 2.0));
        let field = CriticalRadiusField::classical(1);
        let p = prop(Potential::zero(1));
        let bad = vec![(HPoint::h1(1.0, 0.0, 0.0), HPoint::origin(1), HPoint::h1(1.5, 0.0, 0.0)); 2];
        assert!(matches!(lipschitz_kernel_check(1.0, 0.0, &bad, 1.0, &field, &p, RefineConfig::default()), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn equal_points_give_zero_difference() {
        let field = CriticalRadiusField::new(Potential::constant(1, 1.0).unwrap(), RhoSearch::default(), &QuadratureSpec::default().with_samples(64)).unwrap();
        let p = prop(Potential::zero(1));
        let problem = LipschitzProblem { prop: &p, field: &field, alpha: 1.0, n_damping: 0.0, delta: 1.0 };
        let x = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(problem.measured(&x), Some(0.0));
    }
}
