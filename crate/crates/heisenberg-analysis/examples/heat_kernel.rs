//! Heat kernel of the sub-Laplacian: values, scaling and a Gaussian envelope.

use heisenberg_analysis::hgroup::HPoint;
use heisenberg_analysis::semigroup::HeatKernel;

fn main() {
    let k = HeatKernel::shared(1);
    println!("H_1(0) = {:.12} (1/16 = {:.12})", k.eval(1.0, &HPoint::origin(1)).unwrap().value, 1.0 / 16.0);

    println!("{:>6} {:>14} {:>14} {:>14}", "|u|", "H_1(x,0,0)", "H_1(0,0,t)", "ratio");
    for r in [0.25, 0.5, 1.0, 2.0, 3.0, 4.0] {
        let horizontal = k.eval(1.0, &HPoint::h1(r, 0.0, 0.0)).unwrap().value;
        let vertical = k.eval(1.0, &HPoint::h1(0.0, 0.0, r * r)).unwrap().value;
        println!("{r:>6} {horizontal:>14.6e} {vertical:>14.6e} {:>14.4}", horizontal / vertical);
    }

    let u = HPoint::h1(0.7, -0.2, 0.4);
    for a in [0.5, 2.0] {
        let lhs = k.eval(a * a, &u.dilate(a)).unwrap().value;
        let rhs = a.powi(-4) * k.eval(1.0, &u).unwrap().value;
        println!("H_(a²)(δ_a u) / a^-Q H_1(u) at a = {a}: {:.15}", lhs / rhs);
    }
}
