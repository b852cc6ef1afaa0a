//! Localized Hardy–Littlewood maximal function M_{ρ,N} f.

use std::sync::Arc;

use heisenberg_analysis::hgroup::{HBall, HPoint};
use heisenberg_analysis::measure::{QuadratureSpec, SampledFunction};
use heisenberg_analysis::operators::{MaximalConfig, MaximalOperator};
use heisenberg_analysis::potential::{CriticalRadiusField, Potential, RhoSearch};

fn main() {
    let f = SampledFunction::indicator(HBall::centered(1, 1.0).unwrap());
    let classical = MaximalOperator::new(
        MaximalConfig { classical: true, ..MaximalConfig::default() },
        Arc::new(CriticalRadiusField::classical(1)),
    )
    .unwrap();
    let field = CriticalRadiusField::new(Potential::constant(1, 4.0).unwrap(), RhoSearch::default(), &QuadratureSpec::default()).unwrap();
    let localized = MaximalOperator::new(MaximalConfig { n_damping: 3.0, ..MaximalConfig::default() }, Arc::new(field)).unwrap();

    println!("{:>6} {:>12} {:>12} {:>10}", "|u|", "M f", "M_ρ,3 f", "best r");
    for r in [0.0, 0.5, 1.5, 3.0, 6.0] {
        let u = HPoint::h1(r, 0.0, 0.0);
        let m = classical.apply(&f, &u).unwrap();
        let d = localized.apply_detailed(&f, &u).unwrap();
        println!("{r:>6} {m:>12.6} {:>12.6} {:>10.4}", d.value, d.radius);
    }
}
