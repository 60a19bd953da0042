use serde::{Deserialize, Serialize};

use super::jacobi::{assemble, Solver};
use super::matrix::{ComplexMatrix, HermitianMatrix};
use super::LinalgError;
use crate::scalar::{Domain, ScalarFunction};

/// Slack below zero tolerated (and clamped away) when applying a function
/// defined on `[0, ∞)`.
pub fn domain_slack(op_norm: f64) -> f64 {
    1e-9 * op_norm.max(1.0)
}

/// Eigenvalues of magnitude up to this are treated as exact zeros by
/// functions on `[0, ∞)`. Without it, round-off of order `1e-16` on a zero
/// eigenvalue becomes `1e-5` under `t^0.3`.
pub fn zero_snap(op_norm: f64) -> f64 {
    1e-12 * op_norm.max(1.0)
}

/// The argument actually passed to `f` for eigenvalue `l` of a matrix with
/// operator norm `norm`, or `None` if `l` lies outside the domain.
pub fn snap_to_domain(l: f64, norm: f64, domain: Domain) -> Option<f64> {
    match domain {
        Domain::Real => Some(l),
        Domain::NonNegative if l < -domain_slack(norm) => None,
        Domain::NonNegative if l <= zero_snap(norm) => Some(0.0),
        Domain::NonNegative => Some(l),
    }
}

/// Outcome of a Loewner comparison `X ⪯ Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoewnerCheck {
    pub holds: bool,
    /// `λ_min(Y − X)`.
    pub margin: f64,
    /// `max(1, ‖X‖_op, ‖Y‖_op)`.
    pub scale: f64,
}

impl Solver {
    /// `U f(Λ) U*`. For functions on the half-line, eigenvalues in
    /// `[-domain_slack, zero_snap]` are evaluated at zero.
    pub fn apply(&self, h: &HermitianMatrix, f: &ScalarFunction) -> Result<HermitianMatrix, LinalgError> {
        let spec = self.eig(h)?;
        let norm = spec.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut vals = Vec::with_capacity(spec.n());
        for &l in &spec.values {
            let t = snap_to_domain(l, norm, f.domain())
                .ok_or_else(|| LinalgError::Domain { eigenvalue: l, function: f.to_string() })?;
            let v = f.eval(t).map_err(|_| LinalgError::Domain { eigenvalue: l, function: f.to_string() })?;
            vals.push(v);
        }
        Ok(assemble(&spec.vectors, &vals))
    }

    /// Singular values, non-increasing. Hermitian inputs use `|λ|`; other
    /// inputs use the Hermitian dilation `[[0, M], [M*, 0]]`, whose top `n`
    /// eigenvalues are the singular values. Both are the square roots of the
    /// eigenvalues of `M*M`, without the loss of relative accuracy for small
    /// singular values that forming `M*M` would cause.
    pub fn singular_values(&self, m: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare);
        }
        let n = m.n();
        if m.is_exactly_hermitian() {
            let h = HermitianMatrix::from_matrix(m);
            let mut s: Vec<f64> = self.eigenvalues(&h)?.into_iter().map(f64::abs).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            return Ok(s);
        }
        let mut d = ComplexMatrix::zeros(2 * n);
        for i in 0..n {
            for j in 0..n {
                d[(i, n + j)] = m[(i, j)];
                d[(n + j, i)] = m[(i, j)].conj();
            }
        }
        let vals = self.eigenvalues(&HermitianMatrix::from_matrix(&d))?;
        Ok(vals[..n].iter().map(|&v| v.max(0.0)).collect())
    }

    /// `|M| = (M*M)^{1/2}`.
    pub fn abs(&self, m: &ComplexMatrix) -> Result<HermitianMatrix, LinalgError> {
        if m.is_exactly_hermitian() {
            let spec = self.eig(&HermitianMatrix::from_matrix(m))?;
            return Ok(spec.reassemble(f64::abs));
        }
        // eigenvectors of M*M, sorted non-increasing, paired with accurate σ
        let gram = HermitianMatrix::from_matrix(&(&m.adjoint() * m));
        let spec = self.eig(&gram)?;
        let sigma = self.singular_values(m)?;
        Ok(assemble(&spec.vectors, &sigma))
    }

    pub fn op_norm(&self, m: &ComplexMatrix) -> Result<f64, LinalgError> {
        Ok(self.singular_values(m)?[0])
    }

    /// `X ⪯ Y` iff `λ_min(Y − X) ≥ −tol · max(1, ‖X‖_op, ‖Y‖_op)`.
    pub fn loewner_leq(&self, x: &HermitianMatrix, y: &HermitianMatrix, tol: f64) -> Result<LoewnerCheck, LinalgError> {
        check_same_dim(x.n(), y.n())?;
        let xs = self.eigenvalues(x)?;
        let ys = self.eigenvalues(y)?;
        let norm = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let scale = 1.0_f64.max(norm(&xs)).max(norm(&ys));
        let margin = *self.eigenvalues(&y.sub(x))?.last().unwrap();
        Ok(LoewnerCheck { holds: margin >= -tol * scale, margin, scale })
    }

    pub fn is_psd(&self, h: &HermitianMatrix, tol: f64) -> Result<bool, LinalgError> {
        let v = self.eigenvalues(h)?;
        let norm = v[0].abs().max(v[v.len() - 1].abs());
        Ok(v[v.len() - 1] >= -tol * norm.max(1.0))
    }

    pub fn is_expansive(&self, z: &ComplexMatrix, tol: f64) -> Result<bool, LinalgError> {
        let s = self.singular_values(z)?;
        Ok(s[s.len() - 1] >= 1.0 - tol)
    }

    pub fn is_contraction(&self, z: &ComplexMatrix, tol: f64) -> Result<bool, LinalgError> {
        Ok(self.singular_values(z)?[0] <= 1.0 + tol)
    }
}

pub(crate) fn check_same_dim(a: usize, b: usize) -> Result<(), LinalgError> {
    if a != b {
        return Err(LinalgError::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// `Z* A Z`, symmetrized.
pub fn congruence(z: &ComplexMatrix, a: &HermitianMatrix) -> Result<HermitianMatrix, LinalgError> {
    if !z.is_square() {
        return Err(LinalgError::NotSquare);
    }
    check_same_dim(z.n(), a.n())?;
    Ok(HermitianMatrix::from_matrix(&(&(&z.adjoint() * a.as_matrix()) * z)))
}

pub fn apply_scalar_function(h: &HermitianMatrix, f: &ScalarFunction) -> Result<HermitianMatrix, LinalgError> {
    Solver::default().apply(h, f)
}

pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    Solver::default().singular_values(m)
}

pub fn abs_matrix(m: &ComplexMatrix) -> Result<HermitianMatrix, LinalgError> {
    Solver::default().abs(m)
}

pub fn op_norm(m: &ComplexMatrix) -> Result<f64, LinalgError> {
    Solver::default().op_norm(m)
}

pub fn loewner_leq(x: &HermitianMatrix, y: &HermitianMatrix, tol: f64) -> Result<LoewnerCheck, LinalgError> {
    Solver::default().loewner_leq(x, y, tol)
}

pub fn is_psd(h: &HermitianMatrix, tol: f64) -> Result<bool, LinalgError> {
    Solver::default().is_psd(h, tol)
}

pub fn is_expansive(z: &ComplexMatrix, tol: f64) -> Result<bool, LinalgError> {
    Solver::default().is_expansive(z, tol)
}

pub fn is_contraction(z: &ComplexMatrix, tol: f64) -> Result<bool, LinalgError> {
    Solver::default().is_contraction(z, tol)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::scalar::ScalarFunction;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn sqrt_of_diagonal() {
        let h = HermitianMatrix::from_diag(&[4.0, 9.0]);
        let r = apply_scalar_function(&h, &ScalarFunction::sqrt()).unwrap();
        assert!(r.distance(&HermitianMatrix::from_diag(&[2.0, 3.0])) < 1e-15);
    }

    #[test]
    fn square_matches_direct_product() {
        let m = real(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let h = HermitianMatrix::from_matrix(&m);
        let oracle = &m * &m; // [[5,4],[4,5]]
        assert!(oracle.distance(&real(&[&[5.0, 4.0], &[4.0, 5.0]])) == 0.0);
        let r = apply_scalar_function(&h, &ScalarFunction::power(2.0).unwrap()).unwrap();
        assert!(r.distance(&oracle) < 1e-13);
    }

    #[test]
    fn identity_function_round_trips() {
        let m = ComplexMatrix::from_fn(3, 3, |i, j| Complex64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let h = HermitianMatrix::from_matrix(&m);
        let r = apply_scalar_function(&h, &ScalarFunction::affine(1.0, 0.0)).unwrap();
        assert!(r.distance(&h) < 1e-13 * h.frobenius_norm());
    }

    #[test]
    fn domain_clamp_and_error() {
        let slightly = HermitianMatrix::from_diag(&[1.0, -1e-12]);
        let r = apply_scalar_function(&slightly, &ScalarFunction::sqrt()).unwrap();
        assert_eq!(r[(1, 1)].re, 0.0);
        let bad = HermitianMatrix::from_diag(&[1.0, -1e-3]);
        match apply_scalar_function(&bad, &ScalarFunction::sqrt()) {
            Err(LinalgError::Domain { eigenvalue, .. }) => assert_eq!(eigenvalue, -1e-3),
            other => panic!("expected domain error, got {other:?}"),
        }
        // functions on the whole line accept negatives
        assert!(apply_scalar_function(&bad, &ScalarFunction::clamp(1.0)).is_ok());
    }

    #[test]
    fn singular_value_examples() {
        assert_eq!(singular_values(&ComplexMatrix::from_diag(&[3.0, 1.0])).unwrap(), vec![3.0, 1.0]);
        // M*M = diag(0, 4)
        let nil = real(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let gram = &nil.adjoint() * &nil;
        assert_eq!(gram, ComplexMatrix::from_diag(&[0.0, 4.0]));
        let s = singular_values(&nil).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-15 && s[1].abs() < 1e-15);
        // a 3x3 permutation with phases is unitary
        let u = ComplexMatrix::from_fn(3, 3, |i, j| {
            if (i + 1) % 3 == j {
                Complex64::from_polar(1.0, 0.3 * i as f64)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        for s in singular_values(&u).unwrap() {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn abs_examples() {
        let a = abs_matrix(&ComplexMatrix::from_diag(&[-2.0, 3.0])).unwrap();
        assert!(a.distance(&HermitianMatrix::from_diag(&[2.0, 3.0])) < 1e-15);
        let nil = real(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let a = abs_matrix(&nil).unwrap();
        assert!(a.distance(&HermitianMatrix::from_diag(&[0.0, 2.0])) < 1e-14);
        let psd = HermitianMatrix::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!(abs_matrix(&psd).unwrap().distance(&psd) < 1e-14);
    }

    #[test]
    fn congruence_examples() {
        let a = HermitianMatrix::from_real_rows(&[vec![1.0, 0.5], vec![0.5, 3.0]]).unwrap();
        assert_eq!(congruence(&ComplexMatrix::identity(2), &a).unwrap(), a);
        let s = congruence(&ComplexMatrix::from_diag(&[2.0]), &HermitianMatrix::from_diag(&[4.0])).unwrap();
        assert_eq!(s[(0, 0)].re, 16.0);
        let z = real(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let zz = congruence(&z, &HermitianMatrix::identity(2)).unwrap();
        assert_eq!(zz.as_matrix(), &real(&[&[1.0, 1.0], &[1.0, 2.0]]));
        assert!(matches!(
            congruence(&ComplexMatrix::identity(3), &a),
            Err(LinalgError::DimensionMismatch { left: 3, right: 2 })
        ));
    }

    #[test]
    fn loewner_examples() {
        let c = loewner_leq(&HermitianMatrix::zeros(2), &HermitianMatrix::identity(2), 1e-9).unwrap();
        assert!(c.holds && (c.margin - 1.0).abs() < 1e-15);
        let c = loewner_leq(&HermitianMatrix::from_diag(&[2.0, 0.0]), &HermitianMatrix::identity(2), 1e-9).unwrap();
        assert!(!c.holds && (c.margin + 1.0).abs() < 1e-15);
        let x = HermitianMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let c = loewner_leq(&x, &HermitianMatrix::identity(2).scale(2.0), 1e-9).unwrap();
        assert!(c.holds && c.margin.abs() < 1e-15);
    }

    #[test]
    fn expansive_and_contraction_predicates() {
        let id = ComplexMatrix::identity(2);
        assert!(is_expansive(&id, 1e-9).unwrap() && is_contraction(&id, 1e-9).unwrap());
        let d = ComplexMatrix::from_diag(&[2.0, 1.0]);
        assert!(is_expansive(&d, 1e-9).unwrap() && !is_contraction(&d, 1e-9).unwrap());
        let shear = real(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let s = singular_values(&shear).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s[0] - golden).abs() < 1e-14 && (s[1] - (golden - 1.0)).abs() < 1e-14);
        assert!(!is_expansive(&shear, 1e-9).unwrap() && !is_contraction(&shear, 1e-9).unwrap());
    }

    #[test]
    fn psd_predicate() {
        assert!(is_psd(&HermitianMatrix::from_diag(&[1.0, 0.0]), 1e-9).unwrap());
        assert!(!is_psd(&HermitianMatrix::from_diag(&[1.0, -0.1]), 1e-9).unwrap());
    }
}
