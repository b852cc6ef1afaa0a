//! Group law, inverses, dilations and the Korányi gauge on H^1.

use heisenberg_analysis::hgroup::{homogeneous_dimension, HPoint};

fn main() {
    let u = HPoint::h1(1.0, 0.5, -0.25);
    let v = HPoint::h1(-0.3, 2.0, 1.0);

    let uv = u.mul(&v);
    let vu = v.mul(&u);
    println!("u·v = {:?}", uv.coords());
    println!("v·u = {:?}  (the t-coordinates differ by the commutator)", vu.coords());
    println!("u·u⁻¹ = {:?}", u.mul(&u.inv()).coords());

    for a in [0.5, 2.0, 10.0] {
        println!("|δ_{a} u| = {:.6}, a|u| = {:.6}", u.dilate(a).norm(), a * u.norm());
    }

    let w = HPoint::h1(4.0, -1.0, 3.0);
    println!("d(u,v) = {:.6}, d(wu,wv) = {:.6}", u.distance(&v), w.mul(&u).distance(&w.mul(&v)));
    println!("Q = {}", homogeneous_dimension(u.n()));
}
