use normlab::generators::{
    random_hermitian, random_psd, random_psd_rank_deficient, random_unitary, random_with_spectrum, Stream,
};
use normlab::linalg::{congruence, eig_hermitian, singular_values, ComplexMatrix, HermitianMatrix, Solver};
use normlab::{Complex64, ScalarFunction};
use proptest::prelude::*;

fn draw(kind: u8, seed: u64, n: usize) -> HermitianMatrix {
    let mut rng = Stream::new(seed);
    match kind % 4 {
        0 => random_hermitian(&mut rng, n),
        1 => random_psd(&mut rng, n),
        2 => {
            let rank = 1 + (seed as usize) % n;
            random_psd_rank_deficient(&mut rng, n, rank)
        }
        _ => {
            let levels = [0.0, 0.5, 1.0, 2.0];
            let spec: Vec<f64> = (0..n).map(|i| levels[(i / 2) % levels.len()]).collect();
            random_with_spectrum(&mut rng, &spec)
        }
    }
}

fn scale_of(h: &HermitianMatrix) -> f64 {
    h.as_matrix().frobenius_norm().max(1.0)
}

/// Closed-form eigenvalues of a 2×2 Hermitian matrix, descending.
fn eig2(h: &HermitianMatrix) -> [f64; 2] {
    let m = h.as_matrix();
    let (a, d, b) = (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean + rad, mean - rad]
}

#[test]
fn reconstruction_and_unitarity_over_500_matrices() {
    let mut worst = 0.0_f64;
    for i in 0..500u64 {
        let n = 1 + (i as usize % 8);
        let h = draw((i / 8) as u8, 1000 + i, n);
        let s = eig_hermitian(&h).unwrap();
        let rebuilt = s.reassemble(|x| x);
        let rec = rebuilt.as_matrix().distance(h.as_matrix()) / scale_of(&h);
        let uu = (&s.vectors.adjoint() * &s.vectors).distance(&ComplexMatrix::identity(n));
        worst = worst.max(rec).max(uu);
        assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
    }
    assert!(worst <= 1e-10, "worst residual {worst:e}");
}

#[test]
fn two_by_two_matches_closed_form() {
    for seed in 0..200 {
        let h = random_hermitian(&mut Stream::new(seed), 2);
        let got = eig_hermitian(&h).unwrap().values;
        let want = eig2(&h);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 1e-12 * scale_of(&h), "seed {seed}: {g} vs {w}");
        }
    }
}

#[test]
fn degenerate_spectrum_is_recovered() {
    let h = random_with_spectrum(&mut Stream::new(3), &[2.0, 2.0, 1.0, 0.0]);
    let vals = eig_hermitian(&h).unwrap().values;
    for (v, w) in vals.iter().zip([2.0, 2.0, 1.0, 0.0]) {
        assert!((v - w).abs() <= 1e-10);
    }
}

#[test]
fn singular_values_of_scaled_unitary() {
    let u = random_unitary(&mut Stream::new(11), 5).scale(3.0);
    for s in singular_values(&u).unwrap() {
        assert!((s - 3.0).abs() <= 1e-10);
    }
}

#[test]
fn functional_calculus_on_diagonal_input() {
    let h = HermitianMatrix::from_diag(&[4.0, 0.0, 2.25, 9.0]);
    let r = Solver::default().apply(&h, &ScalarFunction::sqrt()).unwrap();
    let want = ComplexMatrix::from_diag(&[2.0, 0.0, 1.5, 3.0]);
    assert!(r.as_matrix().distance(&want) <= 1e-13);
}

#[test]
fn negative_eigenvalue_outside_domain_is_rejected() {
    let h = HermitianMatrix::from_diag(&[1.0, -0.5]);
    assert!(Solver::default().apply(&h, &ScalarFunction::sqrt()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn trace_and_frobenius_are_spectral(kind in 0u8..4, seed in any::<u64>(), n in 1usize..=8) {
        let h = draw(kind, seed, n);
        let vals = eig_hermitian(&h).unwrap().values;
        let sc = scale_of(&h);
        prop_assert!((vals.iter().sum::<f64>() - h.trace()).abs() <= 1e-11 * sc * n as f64);
        let f2 = h.as_matrix().frobenius_norm().powi(2);
        prop_assert!((vals.iter().map(|v| v * v).sum::<f64>() - f2).abs() <= 1e-10 * sc * sc);
    }

    #[test]
    fn eigenvalues_are_unitarily_invariant(kind in 0u8..4, seed in any::<u64>(), n in 1usize..=8) {
        let h = draw(kind, seed, n);
        let u = random_unitary(&mut Stream::new(seed ^ 0x5555), n);
        let rotated = congruence(&u, &h).unwrap();
        let a = eig_hermitian(&h).unwrap().values;
        let b = eig_hermitian(&rotated).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * scale_of(&h));
        }
    }

    #[test]
    fn singular_values_square_sum_is_frobenius(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = Stream::new(seed);
        let m = ComplexMatrix::from_fn(n, n, |_, _| rng.complex_gaussian());
        let s = singular_values(&m).unwrap();
        let f2 = m.frobenius_norm().powi(2);
        prop_assert!(s.iter().all(|x| *x >= 0.0));
        prop_assert!((s.iter().map(|x| x * x).sum::<f64>() - f2).abs() <= 1e-10 * f2.max(1.0));
    }

    #[test]
    fn square_root_squares_back(seed in any::<u64>(), n in 1usize..=8) {
        let a = random_psd(&mut Stream::new(seed), n);
        let r = Solver::default().apply(&a, &ScalarFunction::sqrt()).unwrap();
        let sq = r.as_matrix() * r.as_matrix();
        prop_assert!(sq.distance(a.as_matrix()) <= 1e-10 * scale_of(&a));
    }

    #[test]
    fn eigenvector_leading_entry_is_real_nonnegative(seed in any::<u64>(), n in 1usize..=8) {
        let s = eig_hermitian(&random_hermitian(&mut Stream::new(seed), n)).unwrap();
        for j in 0..n {
            let col = s.vectors.column(j);
            let lead = col.iter().position(|z| z.norm() > 1e-12).unwrap();
            prop_assert_eq!(col[lead].im, 0.0);
            prop_assert!(col[lead].re >= 0.0);
        }
    }
}

#[test]
fn complex_entries_round_trip_through_json() {
    let mut m = ComplexMatrix::identity(2);
    m[(0, 1)] = Complex64::new(0.1, -0.3);
    m[(1, 0)] = Complex64::new(0.1, 0.3);
    let text = serde_json::to_string(&m).unwrap();
    let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
    assert_eq!(back, m);
}
