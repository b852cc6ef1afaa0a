//! Hedberg pointwise bound for I_α through the localized maximal function.

use std::sync::Arc;

use heisenberg_analysis::hgroup::{HBall, HPoint};
use heisenberg_analysis::measure::SampledFunction;
use heisenberg_analysis::operators::{hedberg_check, FracIntegralConfig, HedbergParams, MaximalConfig, MaximalOperator, RieszOperator};
use heisenberg_analysis::potential::CriticalRadiusField;
use heisenberg_analysis::spaces::{BallFamily, FamilyConfig};

fn main() {
    let support = HBall::centered(1, 1.0).unwrap();
    let f = SampledFunction::indicator(support.clone());
    let field = Arc::new(CriticalRadiusField::classical(1));
    let riesz = RieszOperator::new(FracIntegralConfig::default(), field.clone()).unwrap();
    let maximal = MaximalOperator::new(MaximalConfig { classical: true, ..MaximalConfig::default() }, field).unwrap();
    let family = BallFamily::build(1, Some(&support), &FamilyConfig { refine: None, ..FamilyConfig::default() }).unwrap();

    let params = HedbergParams { alpha: 1.0, p: 1.5, kappa: 0.25, theta: 0.0, n_damping: 0.0 };
    let points: Vec<HPoint> = [0.0, 0.5, 1.0, 2.0, 4.0].iter().map(|&r| HPoint::h1(r, 0.0, 0.1)).collect();
    let report = hedberg_check(&f, &points, &params, &riesz, &maximal, &family).unwrap();

    println!("q = {:.4}, ‖f‖ = {:.5}", report.q, report.morrey_norm);
    for p in &report.points {
        println!("|u| = {:.3}: I f = {:.5}, M f = {:.5}, bound {:.5}, ratio {:.4}", p.u.norm(), p.lhs, p.maximal, p.rhs, p.ratio);
    }
    println!("max ratio {:.4}", report.max_ratio);
}
