//! The fractional kernel `K_α(u,v) = Γ(α/2)^{-1} ∫_0^∞ P_s(u,v) s^{α/2-1} ds`
//! and its majorant shape.

use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::hgroup::{homogeneous_dimension, HPoint};
use crate::potential::CriticalRadiusField;
use crate::quad;
use crate::semigroup::trotter::TrotterPropagator;

/// Width (in `ln s`) below the split point `s = |v⁻¹u|²`.
const LOWER_SPAN: f64 = 12.0;
/// Width (in `ln s`) above the split point before the analytic tail.
const UPPER_SPAN: f64 = 18.0;

/// `K_α(u, v)` by log-substituted s-quadrature split at `s = |v⁻¹u|²`.
///
/// Past `s = |v⁻¹u|² e^{18}` the heat kernel is replaced by its value at the
/// origin, `P_s ≈ s^{-Q/2} H_1(0) e^{-s c}`, integrated in closed form.
pub fn kalpha_eval(alpha: f64, u: &HPoint, v: &HPoint, prop: &TrotterPropagator) -> Result<f64> {
    let q = homogeneous_dimension(u.n()) as f64;
    if !(alpha > 0.0 && alpha < q) {
        return Err(invalid("alpha", format!("must lie in (0, {q})")));
    }
    let d = u.distance(v);
    if d == 0.0 {
        return Err(Error::Singular);
    }
    let d2 = d * d;
    let integrand = |x: f64| {
        let s = d2 * x.exp();
        prop.kernel_at(s, u, v) * s.powf(alpha / 2.0)
    };
    let (lower, _) = quad::adaptive(integrand, -LOWER_SPAN, 0.0, 1e-300, 1e-8, 4000)?;
    let (upper, _) = quad::adaptive(integrand, 0.0, UPPER_SPAN, 1e-300, 1e-8, 4000)?;
    let s_end = d2 * UPPER_SPAN.exp();
    let decay = match prop.potential().constant_value() {
        Some(c) => c,
        None => 0.5 * (prop.potential().eval(u) + prop.potential().eval(v)),
    };
    let h0 = prop.table().h1(0.0, 0.0);
    let tail = if decay * s_end > 700.0 {
        0.0
    } else {
        // ∫_{S}^∞ s^{(α-Q)/2-1} e^{-cs} ds ≤ S^{(α-Q)/2}/((Q-α)/2); exact when c = 0.
        h0 * s_end.powf((alpha - q) / 2.0) / ((q - alpha) / 2.0) * (-decay * s_end).exp()
    };
    Ok((lower + upper + tail) / gamma(alpha / 2.0))
}

/// `[1 + |v⁻¹u|/ρ(u)]^{-N} |v⁻¹u|^{α-Q}`.
pub fn majorant_kernel(alpha: f64, n_damping: f64, u: &HPoint, v: &HPoint, field: &CriticalRadiusField) -> Result<f64> {
    let q = homogeneous_dimension(u.n()) as f64;
    if !(alpha > 0.0 && alpha < q) {
        return Err(invalid("alpha", format!("must lie in (0, {q})")));
    }
    if n_damping < 0.0 {
        return Err(invalid("N", "must be nonnegative"));
    }
    let d = u.distance(v);
    if d == 0.0 {
        return Err(Error::Singular);
    }
    let bracket = if n_damping == 0.0 || field.is_classical() { 1.0 } else { (1.0 + d / field.rho(u)?).powf(-n_damping) };
    Ok(bracket * d.powf(alpha - q))
}

/// `Γ((Q-α)/2) / Γ(α/2)`: the factor relating `K_α` for `V ≡ 0` to a
/// Gaussian bound `C s^{-Q/2} e^{-|u|²/(As)}` via
/// `K_α ≤ C A^{(Q-α)/2} Γ((Q-α)/2)/Γ(α/2) · |v⁻¹u|^{α-Q}`.
pub fn riesz_gamma_factor(alpha: f64, q: f64) -> f64 {
    gamma((q - alpha) / 2.0) / gamma(alpha / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use crate::semigroup::trotter::TrotterConfig;

    fn prop(p: Potential) -> TrotterPropagator {
        let cfg = TrotterConfig { per_axis: 2, ..TrotterConfig::default() };
        TrotterPropagator::new(p, cfg).unwrap()
    }

    #[test]
    fn free_kernel_is_homogeneous() {
        let p = prop(Potential::zero(1));
        let u = HPoint::h1(0.4, -0.2, 0.3);
        let v = HPoint::h1(-0.1, 0.5, 0.0);
        let k1 = kalpha_eval(1.0, &u, &v, &p).unwrap();
        let k2 = kalpha_eval(1.0, &u.dilate(3.0), &v.dilate(3.0), &p).unwrap();
        assert!((k2 / k1 - 3f64.powi(-3)).abs() < 1e-6 * 3f64.powi(-3), "{k1} {k2}");
    }

    #[test]
    fn constant_potential_damps() {
        let u = HPoint::h1(0.4, -0.2, 0.3);
        let v = HPoint::origin(1);
        let k0 = kalpha_eval(2.0, &u, &v, &prop(Potential::zero(1))).unwrap();
        let k1 = kalpha_eval(2.0, &u, &v, &prop(Potential::constant(1, 1.0).unwrap())).unwrap();
        assert!(k1 < k0 && k1 > 0.0);
        assert!(matches!(kalpha_eval(2.0, &u, &u, &prop(Potential::zero(1))), Err(Error::Singular)));
    }

    #[test]
    fn majorant_examples() {
        let field = CriticalRadiusField::classical(1);
        let u = HPoint::h1(1.0, 0.0, 0.0);
        let o = HPoint::origin(1);
        assert!((majorant_kernel(1.0, 0.0, &u, &o, &field).unwrap() - 1.0).abs() < 1e-15);
        assert!(majorant_kernel(1.0, 1.0, &u, &u, &field).is_err());
    }
}
