//! Unit-ball measure three ways: exact, Monte Carlo and the radial formula.

use heisenberg_analysis::hgroup::{gamma_quotient_ball_volume, unit_ball_volume, HBall};
use heisenberg_analysis::measure::{mc_integral_ball, radial_integral, QuadratureSpec, SampledFunction};

fn main() {
    let n = 1;
    let ball = HBall::centered(n, 1.0).unwrap();
    println!("exact |B(0,1)|            = {:.6}", unit_ball_volume(n));
    println!("Γ-quotient expression      = {:.6}", gamma_quotient_ball_volume(n));

    for samples in [10_000, 100_000, 1_000_000] {
        let spec = QuadratureSpec::default().with_samples(samples).with_seed(7);
        let est = mc_integral_ball(&SampledFunction::constant(n, 1.0), &ball, &spec).unwrap();
        println!("Monte Carlo, {samples:>8} samples = {:.6} ± {:.6}", est.value, est.stderr);
    }

    let radial = radial_integral(|r| if r < 1.0 { 1.0 } else { 0.0 }, 1.0, n).unwrap();
    println!("radial formula             = {radial:.10}");
    for alpha in [0.5, 1.0, 2.0] {
        let v = radial_integral(|r: f64| r.powf(alpha - 4.0), 1.0, n).unwrap();
        println!("∫_B |u|^(α-Q), α = {alpha}     = {v:.10}");
    }
}
