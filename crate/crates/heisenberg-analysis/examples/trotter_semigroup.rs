//! Trotter splitting of e^{-sL} with L = -Δ + V on a node cloud.

use heisenberg_analysis::hgroup::HBall;
use heisenberg_analysis::measure::SampledFunction;
use heisenberg_analysis::potential::Potential;
use heisenberg_analysis::semigroup::{TrotterConfig, TrotterPropagator};

fn main() {
    let cfg = TrotterConfig { per_axis: 12, max_steps: 8, ..TrotterConfig::default() };
    let f = SampledFunction::indicator(HBall::centered(1, 1.0).unwrap());
    let prop = TrotterPropagator::new(Potential::gauge_power(1, 1.0, 2.0).unwrap(), cfg).unwrap();
    println!("{} nodes", prop.cloud().len());

    let s = 0.5;
    let vals = prop.cloud().sample(&f);
    let free: f64 = prop.free_apply_nodes(s, &vals).unwrap().iter().zip(prop.cloud().weights()).map(|(a, w)| a * w).sum();
    for m in [1, 2, 4, 8] {
        let out = prop.apply_nodes(s, &vals, m).unwrap();
        let mass: f64 = out.iter().zip(prop.cloud().weights()).map(|(a, w)| a * w).sum();
        println!("m = {m}: mass {mass:.6} (free {free:.6})");
    }
    for (m, d) in prop.trotter_trend(s, &f, &[1, 2, 4, 8]).unwrap() {
        println!("change from m/2 to m = {m}: {d:.3e}");
    }
    println!("leakage at s = {s}: {:.3e}", prop.leakage(s, &vals).unwrap());
}
