use heisenberg_analysis::hgroup::{ball_volume, HPoint};
use heisenberg_analysis::semigroup::HeatKernel;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = HPoint> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, t)| HPoint::h1(x, y, t))
}

fn point_n(n: usize) -> impl Strategy<Value = HPoint> {
    prop::collection::vec(-2.0..2.0f64, 2 * n + 1).prop_map(|c| HPoint::from_coords(c).unwrap())
}

fn close(a: &HPoint, b: &HPoint, tol: f64) -> bool {
    a.coords().iter().zip(b.coords()).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

proptest! {
    #[test]
    fn group_law_is_associative(u in point(), v in point(), w in point()) {
        prop_assert!(close(&u.mul(&v).mul(&w), &u.mul(&v.mul(&w)), 1e-12));
    }

    #[test]
    fn inverse_cancels_in_every_dimension(u in (1usize..=3).prop_flat_map(point_n)) {
        let e = HPoint::origin(u.n());
        prop_assert!(close(&u.mul(&u.inv()), &e, 1e-12));
        prop_assert!(close(&u.inv().mul(&u), &e, 1e-12));
    }

    #[test]
    fn dilation_is_an_automorphism(u in point(), v in point(), a in 0.05..20.0f64) {
        prop_assert!(close(&u.mul(&v).dilate(a), &u.dilate(a).mul(&v.dilate(a)), 1e-12));
        prop_assert!((u.dilate(a).norm() - a * u.norm()).abs() <= 1e-12 * a * (1.0 + u.norm()));
    }

    #[test]
    fn distance_is_left_invariant_and_symmetric(u in point(), v in point(), w in point()) {
        let d = u.distance(&v);
        prop_assert!((w.mul(&u).distance(&w.mul(&v)) - d).abs() <= 1e-9 * (1.0 + d));
        prop_assert!((v.distance(&u) - d).abs() <= 1e-12 * (1.0 + d));
    }

    #[test]
    fn gauge_triangle_inequality(u in point(), v in point()) {
        prop_assert!(u.mul(&v).norm() <= u.norm() + v.norm() + 1e-12);
    }

    #[test]
    fn ball_volume_scales_with_q(r in 0.01..100.0f64, n in 1usize..=3) {
        let q = (2 * n + 2) as i32;
        let ratio = ball_volume(n, r) / ball_volume(n, 1.0);
        prop_assert!((ratio / r.powi(q) - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn heat_kernel_is_positive_symmetric_and_scales(u in point(), s in 0.1..4.0f64, a in 0.3..3.0f64) {
        let k = HeatKernel::shared(1);
        let h = k.eval(s, &u).unwrap().value;
        prop_assert!(h >= 0.0);
        prop_assert!(h <= k.eval(s, &HPoint::origin(1)).unwrap().value * (1.0 + 1e-9));
        let hinv = k.eval(s, &u.inv()).unwrap().value;
        prop_assert!((h - hinv).abs() <= 1e-10 * h.max(1e-300));
        let scaled = k.eval(a * a * s, &u.dilate(a)).unwrap().value;
        if h > 1e-200 {
            prop_assert!((scaled * a.powi(4) / h - 1.0).abs() <= 1e-9);
        }
    }
}
