//! Fractional integral I_α f with and without the critical-radius damping.

use std::sync::Arc;

use heisenberg_analysis::hgroup::{HBall, HPoint};
use heisenberg_analysis::measure::{QuadratureSpec, SampledFunction};
use heisenberg_analysis::operators::{FracIntegralConfig, RieszOperator};
use heisenberg_analysis::potential::{CriticalRadiusField, Potential, RhoSearch};

fn main() {
    let f = SampledFunction::indicator(HBall::centered(1, 1.0).unwrap());
    let classical = Arc::new(CriticalRadiusField::classical(1));
    let field = Arc::new(
        CriticalRadiusField::new(Potential::gauge_power(1, 1.0, 2.0).unwrap(), RhoSearch::default(), &QuadratureSpec::default())
            .unwrap(),
    );

    let plain = RieszOperator::new(FracIntegralConfig { alpha: 1.0, ..FracIntegralConfig::default() }, classical).unwrap();
    let damped = RieszOperator::new(FracIntegralConfig { alpha: 1.0, n_damping: 2.0, ..FracIntegralConfig::default() }, field).unwrap();

    println!("{:>6} {:>12} {:>12}", "|u|", "I_1 χ", "damped");
    for r in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let u = HPoint::h1(r, 0.0, 0.0);
        println!("{r:>6} {:>12.6} {:>12.6}", plain.apply(&f, &u).unwrap(), damped.apply(&f, &u).unwrap());
    }

    let u = HPoint::h1(0.5, 0.0, 0.0);
    let (inner, outer) = plain.apply_split(&f, &u, 0.5).unwrap();
    println!("split at σ = 0.5: near {inner:.6} + far {outer:.6}");
}
