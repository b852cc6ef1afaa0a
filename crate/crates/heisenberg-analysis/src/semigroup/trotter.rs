//! Trotter splitting for `e^{-s(-Δ+V)}` on a fixed node cloud in `H^1`.
//!
//! The free step is the row-normalised node quadrature of `H_{τ0}` with
//! `τ0 = s/M` (`M` = finest step count), so free evolution over `s` is the
//! Markov power `S^M` and a Trotter step of length `s/m` is
//! `S^{M/m} e^{-(s/m)V}`. Positivity, `P ≤ S^M` entrywise and the
//! constant-potential identity hold exactly in this discretization.

use std::sync::{Arc, Mutex};

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hgroup::HPoint;
use crate::measure::SampledFunction;
use crate::potential::Potential;
use crate::semigroup::heat::HeatTable;

/// Geometry of the tensor-grid node cloud and the step budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrotterConfig {
    pub half_width_z: f64,
    pub half_width_t: f64,
    pub per_axis: usize,
    /// Finest step count `M`; requested step counts must divide it.
    pub max_steps: usize,
    /// Largest admissible fraction of free-evolved mass in the outer node layer.
    pub leakage_threshold: f64,
}

impl Default for TrotterConfig {
    fn default() -> Self {
        Self { half_width_z: 3.0, half_width_t: 4.0, per_axis: 16, max_steps: 16, leakage_threshold: 0.05 }
    }
}

/// Midpoint tensor grid on `[-Lz, Lz]² × [-Lt, Lt]`.
#[derive(Clone, Debug)]
pub struct NodeCloud {
    points: Vec<HPoint>,
    weights: Vec<f64>,
    boundary: Vec<bool>,
    half_z: f64,
    half_t: f64,
    per_axis: usize,
}

impl NodeCloud {
    pub fn tensor_box(half_z: f64, half_t: f64, per_axis: usize) -> Result<Self> {
        if !(half_z > 0.0 && half_t > 0.0) || per_axis < 2 {
            return Err(invalid("cloud", "need positive half widths and at least 2 nodes per axis"));
        }
        let k = per_axis;
        let (hz, ht) = (2.0 * half_z / k as f64, 2.0 * half_t / k as f64);
        let w = hz * hz * ht;
        let mut points = Vec::with_capacity(k * k * k);
        let mut boundary = Vec::with_capacity(k * k * k);
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    let c = |q: usize, h: f64, half: f64| -half + (q as f64 + 0.5) * h;
                    points.push(HPoint::h1(c(i, hz, half_z), c(j, hz, half_z), c(l, ht, half_t)));
                    boundary.push([i, j, l].iter().any(|&q| q == 0 || q == k - 1));
                }
            }
        }
        Ok(Self { weights: vec![w; points.len()], points, boundary, half_z, half_t, per_axis })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the cell containing `u`, if inside the box.
    pub fn locate(&self, u: &HPoint) -> Option<usize> {
        let k = self.per_axis as f64;
        let idx = |x: f64, half: f64| -> Option<usize> {
            let f = (x + half) / (2.0 * half) * k;
            if (0.0..k).contains(&f) {
                Some(f as usize)
            } else {
                None
            }
        };
        let i = idx(u.x()[0], self.half_z)?;
        let j = idx(u.y()[0], self.half_z)?;
        let l = idx(u.t(), self.half_t)?;
        Some((i * self.per_axis + j) * self.per_axis + l)
    }

    pub fn sample(&self, f: &SampledFunction) -> Vec<f64> {
        self.points.iter().map(|p| f.eval(p)).collect()
    }
}

/// Schrödinger propagator by Trotter splitting on a node cloud (`n = 1`).
pub struct TrotterPropagator {
    potential: Potential,
    cfg: TrotterConfig,
    cloud: NodeCloud,
    table: Arc<HeatTable>,
    potential_values: Vec<f64>,
    base: Mutex<Option<(f64, Arc<Array2<f64>>)>>,
}

impl std::fmt::Debug for TrotterPropagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrotterPropagator")
            .field("potential", &self.potential)
            .field("cfg", &self.cfg)
            .field("nodes", &self.cloud.len())
            .finish()
    }
}

impl TrotterPropagator {
    pub fn new(potential: Potential, cfg: TrotterConfig) -> Result<Self> {
        if potential.n() != 1 {
            return Err(invalid("n", "Trotter propagators are implemented for n = 1"));
        }
        if cfg.max_steps == 0 {
            return Err(invalid("max_steps", "must be positive"));
        }
        if !(cfg.leakage_threshold > 0.0) {
            return Err(invalid("leakage_threshold", "must be positive"));
        }
        let cloud = NodeCloud::tensor_box(cfg.half_width_z, cfg.half_width_t, cfg.per_axis)?;
        let potential_values = cloud.points.iter().map(|p| potential.eval_checked(p)).collect::<Result<Vec<_>>>()?;
        Ok(Self { potential, cfg, cloud, table: HeatTable::shared(1), potential_values, base: Mutex::new(None) })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn cloud(&self) -> &NodeCloud {
        &self.cloud
    }

    pub fn config(&self) -> &TrotterConfig {
        &self.cfg
    }

    pub fn table(&self) -> &HeatTable {
        &self.table
    }

    /// Row-normalised free step `S` for `τ0 = s/M`, cached for the last `s`.
    pub fn base_step(&self, s: f64) -> Result<Arc<Array2<f64>>> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid("s", "time must be positive"));
        }
        let mut guard = self.base.lock().expect("base step cache");
        if let Some((cached_s, m)) = guard.as_ref() {
            if *cached_s == s {
                return Ok(m.clone());
            }
        }
        let tau0 = s / self.cfg.max_steps as f64;
        let np = self.cloud.len();
        let pts = &self.cloud.points;
        let w = &self.cloud.weights;
        let mut a = Array2::<f64>::zeros((np, np));
        for (i, mut row) in a.axis_iter_mut(Axis(0)).enumerate() {
            let mut sum = 0.0;
            for j in 0..np {
                let d = pts[j].inv_mul(&pts[i]);
                let v = self.table.hs(tau0, &d) * w[j];
                row[j] = v;
                sum += v;
            }
            if sum > 0.0 {
                row.mapv_inplace(|x| x / sum);
            } else {
                row[i] = 1.0;
            }
        }
        let a = Arc::new(a);
        *guard = Some((s, a.clone()));
        Ok(a)
    }

    fn check_steps(&self, m: usize) -> Result<usize> {
        if m == 0 || self.cfg.max_steps % m != 0 {
            return Err(invalid("m", format!("step count {m} must divide {}", self.cfg.max_steps)));
        }
        Ok(self.cfg.max_steps / m)
    }

    fn decay(&self, tau: f64) -> Array1<f64> {
        self.potential_values.iter().map(|v| (-tau * v).exp()).collect()
    }

    /// `(S^{M/m} e^{-(s/m)V})^m` applied to node values.
    pub fn apply_nodes(&self, s: f64, values: &[f64], m: usize) -> Result<Vec<f64>> {
        if values.len() != self.cloud.len() {
            return Err(invalid("values", "length differs from the node count"));
        }
        let r = self.check_steps(m)?;
        let base = self.base_step(s)?;
        let d = self.decay(s / m as f64);
        let mut g = Array1::from(values.to_vec());
        for _ in 0..m {
            g = &d * &g;
            for _ in 0..r {
                g = base.dot(&g);
            }
        }
        Ok(g.to_vec())
    }

    /// `S^M` applied to node values.
    pub fn free_apply_nodes(&self, s: f64, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.cloud.len() {
            return Err(invalid("values", "length differs from the node count"));
        }
        let base = self.base_step(s)?;
        let mut g = Array1::from(values.to_vec());
        for _ in 0..self.cfg.max_steps {
            g = base.dot(&g);
        }
        Ok(g.to_vec())
    }

    /// Fraction of free-evolved `|f|` mass on the outer node layer.
    pub fn leakage(&self, s: f64, values: &[f64]) -> Result<f64> {
        let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        let out = self.free_apply_nodes(s, &abs)?;
        let w = &self.cloud.weights;
        let total: f64 = out.iter().zip(w).map(|(g, w)| g * w).sum();
        if total == 0.0 {
            return Ok(0.0);
        }
        let edge: f64 = out
            .iter()
            .zip(w)
            .zip(&self.cloud.boundary)
            .filter(|(_, &b)| b)
            .map(|((g, w), _)| g * w)
            .sum();
        Ok(edge / total)
    }

    /// Applies the propagator with `m` steps; the result carries the node
    /// values and evaluates piecewise constantly on the cloud cells.
    pub fn trotter_apply(&self, s: f64, f: &SampledFunction, m: usize) -> Result<SampledFunction> {
        let values = self.cloud.sample(f);
        let leak = self.leakage(s, &values)?;
        if leak > self.cfg.leakage_threshold {
            return Err(Error::MassLeakage { leak, threshold: self.cfg.leakage_threshold });
        }
        let out = self.apply_nodes(s, &values, m)?;
        self.node_function(format!("P_{s}[{}]", f.label()), out)
    }

    /// Free evolution `S^M f` with the same quadrature.
    pub fn free_apply(&self, s: f64, f: &SampledFunction) -> Result<SampledFunction> {
        let out = self.free_apply_nodes(s, &self.cloud.sample(f))?;
        self.node_function(format!("H_{s}[{}]", f.label()), out)
    }

    fn node_function(&self, label: String, values: Vec<f64>) -> Result<SampledFunction> {
        let lookup = self.cloud.clone();
        let nodes: Vec<(HPoint, f64)> = lookup.points.iter().cloned().zip(lookup.weights.iter().copied()).collect();
        SampledFunction::new(label, 1, move |u| lookup.locate(u).map_or(0.0, |i| values[i])).with_nodes(nodes)
    }

    /// Operator matrix `(S^{M/m} D_{s/m})^m`; entry `(i, j)` divided by
    /// `w_j` is the kernel `P_s(x_i, x_j)`.
    pub fn kernel_matrix(&self, s: f64, m: usize) -> Result<Array2<f64>> {
        let r = self.check_steps(m)?;
        let base = self.base_step(s)?;
        let sr = matrix_power(&base, r);
        let d = self.decay(s / m as f64);
        let step = &sr * &d.insert_axis(Axis(0));
        Ok(matrix_power(&step, m))
    }

    /// Free operator matrix `S^M`.
    pub fn free_kernel_matrix(&self, s: f64) -> Result<Array2<f64>> {
        let base = self.base_step(s)?;
        Ok(matrix_power(&base, self.cfg.max_steps))
    }

    /// `max_{i,j} |S^M_{ij}/w_j − H_s(x_j⁻¹ x_i)| / H_s(0)`: distance of the
    /// discrete free kernel from the continuum one.
    pub fn continuum_deviation(&self, s: f64, free: &Array2<f64>) -> f64 {
        let pts = &self.cloud.points;
        let w = &self.cloud.weights;
        let h0 = self.table.hs(s, &HPoint::origin(1));
        let mut worst = 0.0f64;
        for (i, row) in free.axis_iter(Axis(0)).enumerate() {
            for j in 0..pts.len() {
                let h = self.table.hs(s, &pts[j].inv_mul(&pts[i]));
                worst = worst.max((row[j] / w[j] - h).abs());
            }
        }
        worst / h0
    }

    /// Pointwise kernel `e^{-sV(u)/2} H_s(v⁻¹u) e^{-sV(v)/2}`: one symmetric
    /// splitting step, exact for constant potentials.
    pub fn kernel_at(&self, s: f64, u: &HPoint, v: &HPoint) -> f64 {
        let h = self.table.hs(s, &v.inv_mul(u));
        if h == 0.0 {
            return 0.0;
        }
        match self.potential.constant_value() {
            Some(c) => (-s * c).exp() * h,
            None => (-0.5 * s * (self.potential.eval(u) + self.potential.eval(v))).exp() * h,
        }
    }

    /// `‖r(m) − r(2m)‖_∞` for consecutive entries of `steps`.
    pub fn trotter_trend(&self, s: f64, f: &SampledFunction, steps: &[usize]) -> Result<Vec<(usize, f64)>> {
        let values = self.cloud.sample(f);
        let mut prev: Option<Vec<f64>> = None;
        let mut out = Vec::new();
        for &m in steps {
            let r = self.apply_nodes(s, &values, m)?;
            if let Some(p) = &prev {
                let d = p.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                out.push((m, d));
            }
            prev = Some(r);
        }
        Ok(out)
    }
}

/// `A^k` by repeated squaring.
pub fn matrix_power(a: &Array2<f64>, k: usize) -> Array2<f64> {
    assert!(k >= 1, "matrix power must be positive");
    let mut result: Option<Array2<f64>> = None;
    let mut base = a.clone();
    let mut e = k;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r.dot(&base),
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = base.dot(&base);
    }
    result.expect("k >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgroup::HBall;

    fn small() -> TrotterConfig {
        TrotterConfig { half_width_z: 2.5, half_width_t: 3.0, per_axis: 6, max_steps: 4, leakage_threshold: 0.5 }
    }

    #[test]
    fn constant_potential_scales_free_result() {
        let f = SampledFunction::indicator(HBall::centered(1, 1.0).unwrap());
        let c = 0.7;
        let p = TrotterPropagator::new(Potential::constant(1, c).unwrap(), small()).unwrap();
        let vals = p.cloud().sample(&f);
        let free = p.free_apply_nodes(1.0, &vals).unwrap();
        for m in [1, 2, 4] {
            let out = p.apply_nodes(1.0, &vals, m).unwrap();
            for (a, b) in out.iter().zip(&free) {
                assert!((a - (-c as f64).exp() * b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn domination_and_positivity() {
        let p = TrotterPropagator::new(Potential::gauge_power(1, 1.0, 2.0).unwrap(), small()).unwrap();
        let k = p.kernel_matrix(0.8, 2).unwrap();
        let h = p.free_kernel_matrix(0.8).unwrap();
        assert!(k.iter().zip(h.iter()).all(|(a, b)| *a >= 0.0 && *a <= *b * (1.0 + 1e-12)));
        assert!(p.apply_nodes(0.8, &vec![1.0; p.cloud().len()], 3).is_err());
    }

    #[test]
    fn zero_potential_is_free() {
        let p = TrotterPropagator::new(Potential::zero(1), small()).unwrap();
        let vals: Vec<f64> = (0..p.cloud().len()).map(|i| (i % 7) as f64).collect();
        assert_eq!(p.apply_nodes(1.0, &vals, 4).unwrap(), p.free_apply_nodes(1.0, &vals).unwrap());
    }

    #[test]
    fn leakage_is_detected() {
        let cfg = TrotterConfig { leakage_threshold: 1e-6, ..small() };
        let p = TrotterPropagator::new(Potential::zero(1), cfg).unwrap();
        let f = SampledFunction::indicator(HBall::centered(1, 1.0).unwrap());
        assert!(matches!(p.trotter_apply(4.0, &f, 1), Err(Error::MassLeakage { .. })));
    }
}
