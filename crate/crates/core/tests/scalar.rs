use normlab::scalar::catalog;
use normlab::scalar::{angle_decompose, check_operator_concave_sample, smoothing_gap};
use normlab::ScalarFunction;
use proptest::prelude::*;

fn grid(hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| hi * i as f64 / steps as f64).collect()
}

/// `½(√((t − a)² + r) + t − √(a² + r))` written directly.
fn smoother_oracle(a: f64, r: f64, t: f64) -> f64 {
    0.5 * (((t - a) * (t - a) + r).sqrt() + t - (a * a + r).sqrt())
}

#[test]
fn decomposition_is_exact_at_nodes_for_convex_catalog() {
    let grids = [grid(4.0, 8), grid(10.0, 100), vec![0.0, 0.1, 0.25, 0.5, 1.0, 1.7, 3.0, 6.0]];
    for g in catalog::convex() {
        for nodes in &grids {
            let d = angle_decompose(&g, nodes).unwrap();
            assert!(d.lambda0 >= 0.0);
            assert!(d.terms.iter().all(|t| t.coefficient >= 0.0 && t.knot > 0.0));
            assert!(d.terms.windows(2).all(|w| w[0].knot < w[1].knot));
            for &t in nodes {
                let want = g.eval(t).unwrap();
                let scale = want.abs().max(1.0);
                assert!((d.eval(t) - want).abs() <= 1e-12 * scale, "{g} at {t}: {} vs {want}", d.eval(t));
            }
        }
    }
}

#[test]
fn decomposition_rejects_concave_input() {
    let g = ScalarFunction::sqrt();
    assert!(angle_decompose(&g, &grid(4.0, 8)).is_err());
}

#[test]
fn smoothing_gap_is_within_sqrt_r() {
    let points = grid(10.0, 10_000);
    for a in [0.5, 1.0, 3.0] {
        let mut last = f64::INFINITY;
        for r in [1.0, 1e-2, 1e-4] {
            let gap = smoothing_gap(a, r, &points).unwrap();
            assert!(gap <= r.sqrt(), "a={a} r={r}: {gap}");
            assert!(gap < last);
            last = gap;
        }
    }
}

#[test]
fn smoother_inverse_is_operator_concave_on_samples() {
    for n in [2, 3] {
        for f in
            [ScalarFunction::smoother_inverse(1.0, 0.5).unwrap(), ScalarFunction::smoother_inverse(0.5, 0.01).unwrap()]
        {
            let rep = check_operator_concave_sample(&f, n, 200, 7).unwrap();
            assert!(rep.ok, "{f} n={n}: {:e}", rep.worst_margin);
            assert_eq!(rep.trials, 200);
        }
    }
}

#[test]
fn operator_concave_sampling_requires_the_tag() {
    assert!(check_operator_concave_sample(&ScalarFunction::clamp(1.0), 2, 10, 0).is_err());
}

#[test]
fn catalog_values_at_reference_points() {
    assert_eq!(ScalarFunction::sqrt().eval(4.0).unwrap(), 2.0);
    assert_eq!(ScalarFunction::angle(1.0).unwrap().eval(0.5).unwrap(), 0.0);
    assert_eq!(ScalarFunction::angle(1.0).unwrap().eval(3.0).unwrap(), 2.0);
    assert_eq!(ScalarFunction::clamp(1.0).eval(5.0).unwrap(), 1.0);
    assert_eq!(ScalarFunction::power(2.0).unwrap().eval(3.0).unwrap(), 9.0);
    assert!(ScalarFunction::sqrt().eval(-1.0).is_err());
}

proptest! {
    #[test]
    fn smoother_matches_direct_formula(a in 0.01f64..5.0, r in 1e-3f64..2.0, t in 0.0f64..20.0) {
        let h = ScalarFunction::smoother(a, r).unwrap().eval(t).unwrap();
        prop_assert!((h - smoother_oracle(a, r, t)).abs() <= 1e-12 * (1.0 + t));
    }

    #[test]
    fn smoother_inverse_inverts(a in 0.01f64..5.0, r in 1e-3f64..2.0, t in 0.0f64..20.0) {
        let h = ScalarFunction::smoother(a, r).unwrap();
        let hi = ScalarFunction::smoother_inverse(a, r).unwrap();
        let back = h.eval(hi.eval(t).unwrap()).unwrap();
        prop_assert!((back - t).abs() <= 1e-10 * (1.0 + t));
        let forward = h.eval(t).unwrap();
        prop_assert!((hi.eval(forward).unwrap() - t).abs() <= 1e-8 * (1.0 + t));
    }

    #[test]
    fn smoother_vanishes_at_zero_and_is_below_angle_plus_sqrt_r(a in 0.01f64..5.0, r in 1e-4f64..1.0, t in 0.0f64..20.0) {
        let h = ScalarFunction::smoother(a, r).unwrap();
        prop_assert!(h.eval(0.0).unwrap().abs() <= 1e-15);
        let g = ScalarFunction::angle(a).unwrap().eval(t).unwrap();
        prop_assert!((h.eval(t).unwrap() - g).abs() <= r.sqrt());
    }

    #[test]
    fn concave_catalog_is_midpoint_concave(i in 0usize..11, s in 0.0f64..10.0, t in 0.0f64..10.0) {
        let f = &catalog::concave()[i];
        let mid = f.eval(0.5 * (s + t)).unwrap();
        let avg = 0.5 * (f.eval(s).unwrap() + f.eval(t).unwrap());
        prop_assert!(mid >= avg - 1e-12 * (1.0 + avg.abs()));
    }
}
