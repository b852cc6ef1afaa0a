//! The free heat kernel of the sub-Laplacian.
//!
//! With `λ` dual to the central variable,
//! `H_1(z, t) = 2 (2π)^{-1} (4π)^{-n} ∫_0^∞ (λ/sinh λ)^n e^{-λ|z|² coth(λ)/4} cos(λt) dλ`
//! and `H_s(u) = s^{-Q/2} H_1(δ_{s^{-1/2}} u)`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hgroup::{homogeneous_dimension, HPoint};
use crate::quad::GaussLegendre;

const GL_ORDER: usize = 8;
const MAX_BUCKETS: usize = 40;

/// Heat kernel value with the unclamped quadrature result.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatValue {
    pub value: f64,
    pub raw: f64,
}

#[derive(Debug)]
struct LambdaNodes {
    lambda: Vec<f64>,
    amp: Vec<f64>,
    rate: Vec<f64>,
}

/// Direct λ-quadrature evaluator for `H_s`.
#[derive(Debug)]
pub struct HeatKernel {
    n: usize,
    lambda_max: f64,
    node_budget: usize,
    prefactor: f64,
    buckets: Vec<OnceLock<LambdaNodes>>,
    clamped: AtomicUsize,
}

impl HeatKernel {
    /// Evaluator whose λ-tail weight `(Λ/sinh Λ)^n` is below `target_rel_tol`.
    pub fn new(n: usize, target_rel_tol: f64, node_budget: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "complex dimension must be positive"));
        }
        if !(target_rel_tol > 0.0 && target_rel_tol < 1.0) {
            return Err(invalid("target_rel_tol", "must lie in (0, 1)"));
        }
        let per = target_rel_tol.powf(1.0 / n as f64);
        let mut lambda_max: f64 = 1.0;
        while lambda_max / lambda_max.sinh() > per {
            lambda_max += 0.25;
        }
        let needed = nodes_for(lambda_max, 0);
        if needed > node_budget {
            return Err(Error::ToleranceUnreachable { requested: target_rel_tol, needed, budget: node_budget });
        }
        let nf = n as f64;
        let prefactor = 2.0 / (2.0 * std::f64::consts::PI) / (4.0 * std::f64::consts::PI).powf(nf);
        Ok(Self {
            n,
            lambda_max,
            node_budget,
            prefactor,
            buckets: (0..MAX_BUCKETS).map(|_| OnceLock::new()).collect(),
            clamped: AtomicUsize::new(0),
        })
    }

    /// Shared evaluator at the default tolerance (1e-13, 2^16 nodes).
    pub fn shared(n: usize) -> Arc<HeatKernel> {
        static KERNELS: OnceLock<Mutex<HashMap<usize, Arc<HeatKernel>>>> = OnceLock::new();
        let map = KERNELS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = map.lock().expect("heat kernel registry");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(HeatKernel::new(n, 1e-13, 1 << 16).expect("default heat kernel")))
            .clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Number of negative quadrature values clamped to zero so far.
    pub fn clamped_count(&self) -> usize {
        self.clamped.load(Ordering::Relaxed)
    }

    fn bucket(&self, t_abs: f64) -> Result<&LambdaNodes> {
        let k = if t_abs <= 1.0 { 0 } else { t_abs.log2().ceil() as usize };
        if k >= MAX_BUCKETS {
            return Err(invalid("t", format!("central coordinate {t_abs:e} out of range")));
        }
        let needed = nodes_for(self.lambda_max, k);
        if needed > self.node_budget {
            return Err(Error::ToleranceUnreachable { requested: t_abs, needed, budget: self.node_budget });
        }
        Ok(self.buckets[k].get_or_init(|| build_nodes(self.n, self.lambda_max, k)))
    }

    /// Raw quadrature of `H_1` at `|z|² = z2` and central coordinate `t`.
    pub fn h1_raw(&self, z2: f64, t: f64) -> Result<f64> {
        let nodes = self.bucket(t.abs())?;
        let mut s = 0.0;
        for i in 0..nodes.lambda.len() {
            let e = nodes.rate[i] * z2;
            if e > 745.0 {
                // rates increase with λ, so later terms vanish too
                break;
            }
            s += nodes.amp[i] * (-e).exp() * (nodes.lambda[i] * t).cos();
        }
        Ok(self.prefactor * s)
    }

    /// `H_s(u)` by λ-quadrature; negative raw values are clamped to 0.
    pub fn eval(&self, s: f64, u: &HPoint) -> Result<HeatValue> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid("s", "time must be positive"));
        }
        if u.n() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: u.n() });
        }
        let q = homogeneous_dimension(self.n) as f64;
        let raw = s.powf(-q / 2.0) * self.h1_raw(u.z_norm_sq() / s, u.t() / s)?;
        if raw < 0.0 {
            self.clamped.fetch_add(1, Ordering::Relaxed);
        }
        Ok(HeatValue { value: raw.max(0.0), raw })
    }
}

fn panel_width(k: usize) -> f64 {
    (std::f64::consts::PI / 2f64.powi(k as i32)).min(0.5)
}

fn nodes_for(lambda_max: f64, k: usize) -> usize {
    (lambda_max / panel_width(k)).ceil() as usize * GL_ORDER
}

fn build_nodes(n: usize, lambda_max: f64, k: usize) -> LambdaNodes {
    let gl = GaussLegendre::new(GL_ORDER);
    let w = panel_width(k);
    let panels = (lambda_max / w).ceil() as usize;
    let mut lambda = Vec::with_capacity(panels * GL_ORDER);
    let mut amp = Vec::with_capacity(panels * GL_ORDER);
    let mut rate = Vec::with_capacity(panels * GL_ORDER);
    for p in 0..panels {
        let a = p as f64 * w;
        for (l, wl) in gl.mapped(a, a + w) {
            let ratio = if l < 1e-8 { 1.0 - l * l / 6.0 } else { l / l.sinh() };
            let coth_l = if l < 1e-8 { 1.0 + l * l / 3.0 } else { l / l.tanh() };
            lambda.push(l);
            amp.push(wl * ratio.powi(n as i32));
            rate.push(coth_l / 4.0);
        }
    }
    LambdaNodes { lambda, amp, rate }
}

/// `H_s(u)` with the shared default evaluator.
pub fn heat_kernel_eval(s: f64, u: &HPoint) -> Result<f64> {
    Ok(HeatKernel::shared(u.n()).eval(s, u)?.value)
}

/// Bicubic table of `H_1` on `|z| ∈ [0, z_max]`, `|t| ∈ [0, t_max]`.
///
/// Interpolates `ln H_1` where the stencil is above the noise floor and
/// `H_1` itself elsewhere; returns 0 outside the table.
#[derive(Debug)]
pub struct HeatTable {
    n: usize,
    h: f64,
    nz: usize,
    nt: usize,
    z_max: f64,
    t_max: f64,
    values: Vec<f64>,
    logs: Vec<f64>,
    floor: f64,
}

impl HeatTable {
    pub fn build(kernel: &HeatKernel, z_max: f64, t_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && z_max > h && t_max > h) {
            return Err(invalid("table", "grid step must be positive and smaller than the extents"));
        }
        let nz = (z_max / h).ceil() as usize + 1;
        let nt = (t_max / h).ceil() as usize + 1;
        let mut values = Vec::with_capacity(nz * nt);
        for i in 0..nz {
            let z = i as f64 * h;
            for j in 0..nt {
                values.push(kernel.h1_raw(z * z, j as f64 * h)?);
            }
        }
        let h0 = values[0];
        let floor = 1e-13 * h0;
        let logs = values.iter().map(|&v| if v > floor { v.ln() } else { f64::NAN }).collect();
        Ok(Self { n: kernel.n(), h, nz, nt, z_max: (nz - 1) as f64 * h, t_max: (nt - 1) as f64 * h, values, logs, floor })
    }

    /// Shared table per dimension (`|z| ≤ 12`, `|t| ≤ 16`, step 1/32); relative
    /// interpolation error below 2e-5 where `H_1 > 1e-10·H_1(0)`.
    pub fn shared(n: usize) -> Arc<HeatTable> {
        static TABLES: OnceLock<Mutex<HashMap<usize, Arc<HeatTable>>>> = OnceLock::new();
        let map = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = map.lock().expect("heat table registry");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(HeatTable::build(&HeatKernel::shared(n), 12.0, 16.0, 1.0 / 32.0).expect("default heat table")))
            .clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// `H_1` at `|z| = zeta`, central coordinate `t`.
    pub fn h1(&self, zeta: f64, t: f64) -> f64 {
        let t = t.abs();
        let zeta = zeta.abs();
        if zeta >= self.z_max || t >= self.t_max {
            return 0.0;
        }
        let fz = zeta / self.h;
        let ft = t / self.h;
        let i = fz.floor() as isize;
        let j = ft.floor() as isize;
        let (dz, dt) = (fz - i as f64, ft - j as f64);
        let wz = cubic_weights(dz);
        let wt = cubic_weights(dt);
        let mut log_ok = true;
        let mut acc_log = 0.0;
        let mut acc_val = 0.0;
        for (a, wa) in wz.iter().enumerate() {
            // even reflection at 0, clamp at the far edge
            let ii = reflect(i + a as isize - 1, self.nz);
            for (b, wb) in wt.iter().enumerate() {
                let jj = reflect(j + b as isize - 1, self.nt);
                let k = ii * self.nt + jj;
                let w = wa * wb;
                acc_val += w * self.values[k];
                let l = self.logs[k];
                if l.is_nan() {
                    log_ok = false;
                } else {
                    acc_log += w * l;
                }
            }
        }
        if log_ok {
            acc_log.exp()
        } else if acc_val > self.floor {
            acc_val
        } else {
            acc_val.max(0.0)
        }
    }

    /// `H_s(u)` from the table.
    pub fn hs(&self, s: f64, u: &HPoint) -> f64 {
        self.hs_parts(s, u.z_norm_sq(), u.t())
    }

    /// `H_s` from `|z|²` and `t`.
    pub fn hs_parts(&self, s: f64, z2: f64, t: f64) -> f64 {
        let q = homogeneous_dimension(self.n) as i32;
        let scale = if q == 4 { 1.0 / (s * s) } else { s.powf(-(q as f64) / 2.0) };
        scale * self.h1((z2 / s).sqrt(), t / s)
    }
}

fn reflect(i: isize, len: usize) -> usize {
    let i = i.unsigned_abs();
    i.min(len - 1)
}

/// Catmull–Rom weights for offsets -1, 0, 1, 2.
fn cubic_weights(x: f64) -> [f64; 4] {
    let x2 = x * x;
    let x3 = x2 * x;
    [
        0.5 * (-x3 + 2.0 * x2 - x),
        0.5 * (3.0 * x3 - 5.0 * x2 + 2.0),
        0.5 * (-3.0 * x3 + 4.0 * x2 + x),
        0.5 * (x3 - x2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_origin() {
        let k = HeatKernel::shared(1);
        let v = k.eval(1.0, &HPoint::origin(1)).unwrap();
        assert!((v.value - 0.0625).abs() < 1e-12, "{v:?}");
    }

    #[test]
    fn known_profile_values() {
        let k = HeatKernel::shared(1);
        // slices of H_1 obtained by independent adaptive quadrature
        let cases = [(1.0, 0.0, 3.943e-2), (2.0, 0.0, 1.267e-2), (0.0, 1.0, 9.93e-3), (0.0, 2.0, 4.65e-4)];
        for (z, t, expect) in cases {
            let v = k.h1_raw(z * z, t).unwrap();
            assert!((v / expect - 1.0).abs() < 2e-3, "H_1({z},{t}) = {v}");
        }
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let k = HeatKernel::shared(1);
        let table = HeatTable::shared(1);
        for &(z, t) in &[(0.0, 0.0), (0.33, 0.71), (1.7, -2.2), (3.1, 5.5), (6.0, 0.4), (0.15, 7.8)] {
            let d = k.h1_raw(z * z, t).unwrap();
            let i = table.h1(z, t);
            assert!((d - i).abs() <= 2e-5 * d.abs(), "({z},{t}): {d} vs {i}");
        }
    }

    #[test]
    fn dimension_two_at_origin() {
        // n = 2: 2 (2π)^{-1} (4π)^{-2} ∫ (λ/sinh λ)² dλ with ∫ = π²/6.
        let k = HeatKernel::new(2, 1e-13, 1 << 16).unwrap();
        let v = k.h1_raw(0.0, 0.0).unwrap();
        let exact = 2.0 / (2.0 * std::f64::consts::PI) / (16.0 * std::f64::consts::PI.powi(2)) * std::f64::consts::PI.powi(2) / 6.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(HeatKernel::new(1, 1e-13, 64), Err(Error::ToleranceUnreachable { .. })));
    }
}
