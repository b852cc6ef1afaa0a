//! Discrete group convolution `(f ∗ g)(u) = ∫ f(v) g(v⁻¹u) dv`.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::hgroup::HPoint;
use crate::measure::SampledFunction;

/// `(f ∗ g)(u) ≈ Σ_j f(v_j) g(v_j⁻¹u) w_j` over `nodes`.
pub fn group_convolve<K>(f: &SampledFunction, kernel: K, nodes: &[(HPoint, f64)]) -> Result<SampledFunction>
where
    K: Fn(&HPoint) -> f64 + Send + Sync + 'static,
{
    if nodes.is_empty() {
        return Err(invalid("nodes", "empty node set"));
    }
    if nodes.iter().any(|(p, w)| p.n() != f.n() || !(*w > 0.0 && w.is_finite())) {
        return Err(invalid("nodes", "node dimension or weight mismatch"));
    }
    let terms: Arc<Vec<(HPoint, f64)>> = Arc::new(
        nodes
            .iter()
            .map(|(p, w)| (p.clone(), f.eval(p) * w))
            .filter(|(_, fw)| *fw != 0.0)
            .collect(),
    );
    let label = format!("conv[{}]", f.label());
    Ok(SampledFunction::new(label, f.n(), move |u| terms.iter().map(|(v, fw)| fw * kernel(&v.inv_mul(u))).sum()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgroup::HBall;
    use crate::measure::grid_nodes;
    use crate::semigroup::heat::HeatTable;

    #[test]
    fn averaging_kernel_keeps_indicator_in_unit_interval() {
        let ball = HBall::centered(1, 1.0).unwrap();
        let f = SampledFunction::indicator(ball.clone());
        let eps = 0.5;
        let small = HBall::centered(1, eps).unwrap();
        let vol = small.volume();
        let nodes = grid_nodes(&HBall::centered(1, 1.5).unwrap(), 48).unwrap();
        let g = group_convolve(&f, move |w: &HPoint| if w.norm() < eps { 1.0 / vol } else { 0.0 }, &nodes).unwrap();
        let deep = g.eval(&HPoint::origin(1));
        assert!((deep - 1.0).abs() < 0.1, "{deep}");
        assert!((0.0..=1.0 + 0.1).contains(&g.eval(&HPoint::h1(0.9, 0.0, 0.0))));
        assert!(g.eval(&HPoint::h1(3.0, 0.0, 0.0)) == 0.0);
    }

    #[test]
    fn heat_convolution_approaches_initial_data() {
        let f = SampledFunction::indicator(HBall::centered(1, 1.0).unwrap());
        let nodes = grid_nodes(&HBall::centered(1, 1.0).unwrap(), 48).unwrap();
        let table = HeatTable::shared(1);
        let errs: Vec<f64> = [0.4, 0.2, 0.1]
            .iter()
            .map(|&s| {
                let t = table.clone();
                let g = group_convolve(&f, move |w: &HPoint| t.hs(s, w), &nodes).unwrap();
                (g.eval(&HPoint::origin(1)) - 1.0).abs()
            })
            .collect();
        assert!(errs[2] < errs[0], "{errs:?}");
        assert!(group_convolve(&f, |_: &HPoint| 1.0, &[]).is_err());
    }
}
