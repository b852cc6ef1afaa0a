//! Critical radius ρ(u) for a few potentials, estimated and in closed form.

use heisenberg_analysis::hgroup::HPoint;
use heisenberg_analysis::measure::QuadratureSpec;
use heisenberg_analysis::potential::{critical_radius, rh_check, Potential};
use heisenberg_analysis::HBall;

fn main() {
    let spec = QuadratureSpec::default().with_samples(4096);
    let potentials = [
        Potential::constant(1, 1.0).unwrap(),
        Potential::gauge_power(1, 1.0, 2.0).unwrap(),
        Potential::gauge_power(1, 4.0, 1.0).unwrap(),
    ];
    let points = [HPoint::origin(1), HPoint::h1(1.0, 0.0, 0.0), HPoint::h1(0.0, 2.0, 3.0)];
    for v in &potentials {
        println!("{}", v.label());
        for u in &points {
            let est = critical_radius(u, v, &spec).unwrap();
            let closed = v.closed_form_rho(u).map_or("-".to_string(), |r| format!("{r:.5}"));
            println!("  u = {:?}: ρ = {:.5} in [{:.5}, {:.5}], closed form {closed}", u.coords(), est.rho, est.bracket.0, est.bracket.1);
        }
    }

    let balls: Vec<HBall> = [0.1, 1.0, 10.0].iter().map(|&r| HBall::centered(1, r).unwrap()).collect();
    let rh = rh_check(&potentials[1], 2.0, &balls, &spec).unwrap();
    println!("reverse Hölder RH_2 for |u|²: worst constant {:.4} on B(0, {})", rh.worst_constant, rh.witness.radius);
}
