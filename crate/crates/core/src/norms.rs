//! Symmetric norms computed from singular values, and the Ky Fan dominance
//! test that decides "for every symmetric norm" comparisons.
//!
//! `‖X‖_k ≤ ‖Y‖_k` for every Ky Fan `k` is equivalent to `‖X‖ ≤ ‖Y‖` for
//! every unitarily invariant norm, so a dominance check over `k = 1..=n`
//! is complete. Schatten norms are provided as independent sanity checks.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{ComplexMatrix, HermitianMatrix, LinalgError, Solver};
use crate::scalar::ScalarFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("Ky Fan index k = {k} outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("Schatten exponent must satisfy 1 <= p <= inf, got {0}")]
    InvalidExponent(f64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    KyFan {
        k: usize,
    },
    Schatten {
        #[serde(serialize_with = "ser_exponent", deserialize_with = "de_exponent")]
        p: f64,
    },
    Operator,
    Trace,
    Frobenius,
}

fn ser_exponent<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
    if p.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*p)
    }
}

fn de_exponent<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(p) => Ok(p),
        Raw::Text(t) if t == "inf" || t == "infinity" => Ok(f64::INFINITY),
        Raw::Text(t) => Err(serde::de::Error::custom(format!("bad Schatten exponent {t:?}"))),
    }
}

/// Partial sums `‖M‖_1, …, ‖M‖_n` of non-increasing singular values.
pub fn ky_fan_norms(sigma: &[f64]) -> Vec<f64> {
    sigma
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s;
            Some(*acc)
        })
        .collect()
}

/// Evaluates `spec` on already computed singular values.
pub fn norm_from_singular_values(sigma: &[f64], spec: NormSpec) -> Result<f64, NormError> {
    let n = sigma.len();
    match spec {
        NormSpec::KyFan { k } => {
            if k == 0 || k > n {
                return Err(NormError::KOutOfRange { k, n });
            }
            Ok(sigma[..k].iter().sum())
        }
        NormSpec::Operator => Ok(sigma[0]),
        NormSpec::Trace => Ok(sigma.iter().sum()),
        NormSpec::Frobenius => Ok(sigma.iter().map(|s| s * s).sum::<f64>().sqrt()),
        NormSpec::Schatten { p } => {
            if p.is_nan() || p < 1.0 {
                return Err(NormError::InvalidExponent(p));
            }
            if p.is_infinite() {
                return Ok(sigma[0]);
            }
            // scale by σ₁ so large p does not overflow
            let top = sigma[0];
            if top == 0.0 {
                return Ok(0.0);
            }
            Ok(top * sigma.iter().map(|s| (s / top).powf(p)).sum::<f64>().powf(1.0 / p))
        }
    }
}

pub fn norm(m: &ComplexMatrix, spec: NormSpec) -> Result<f64, NormError> {
    norm_with(&Solver::default(), m, spec)
}

pub fn norm_with(solver: &Solver, m: &ComplexMatrix, spec: NormSpec) -> Result<f64, NormError> {
    norm_from_singular_values(&solver.singular_values(m)?, spec)
}

/// Result of a Ky Fan comparison `X ≺_w Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dominance {
    pub holds: bool,
    /// `‖Y‖_k − ‖X‖_k` for `k = 1..=n`.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    /// 1-based index of the smallest margin.
    pub binding_k: usize,
    /// `max(1, ‖Y‖_trace)`.
    pub scale: f64,
}

/// Per-k margins from two singular value vectors.
pub fn dominance_from_singular_values(sx: &[f64], sy: &[f64], tol: f64) -> Result<Dominance, NormError> {
    if sx.len() != sy.len() {
        return Err(NormError::LengthMismatch(sx.len(), sy.len()));
    }
    let kx = ky_fan_norms(sx);
    let ky = ky_fan_norms(sy);
    let margins: Vec<f64> = ky.iter().zip(&kx).map(|(y, x)| y - x).collect();
    let (idx, &min_margin) = margins.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty spectrum");
    let scale = ky.last().copied().unwrap_or(0.0).max(1.0);
    Ok(Dominance { holds: min_margin >= -tol * scale, margins, min_margin, binding_k: idx + 1, scale })
}

pub fn ky_fan_dominance(x: &ComplexMatrix, y: &ComplexMatrix, tol: f64) -> Result<Dominance, NormError> {
    ky_fan_dominance_with(&Solver::default(), x, y, tol)
}

pub fn ky_fan_dominance_with(
    solver: &Solver,
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    tol: f64,
) -> Result<Dominance, NormError> {
    if x.n() != y.n() {
        return Err(LinalgError::DimensionMismatch { left: x.n(), right: y.n() }.into());
    }
    dominance_from_singular_values(&solver.singular_values(x)?, &solver.singular_values(y)?, tol)
}

/// Weak majorization `x ≺_w y` after sorting both non-increasing.
pub fn weak_majorization(x: &[f64], y: &[f64]) -> Result<bool, NormError> {
    if x.len() != y.len() {
        return Err(NormError::LengthMismatch(x.len(), y.len()));
    }
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    };
    let (xs, ys) = (sorted(x), sorted(y));
    let (mut sx, mut sy) = (0.0, 0.0);
    for (a, b) in xs.iter().zip(&ys) {
        sx += a;
        sy += b;
        if sx > sy {
            return Ok(false);
        }
    }
    Ok(true)
}

/// For PSD `X ≺_w Y` and increasing convex `g` with `g(0) = 0`, checks
/// that `g(X) ≺_w g(Y)` as well.
pub fn monotone_convex_transfer_check(
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    g: &ScalarFunction,
    tol: f64,
) -> Result<Dominance, NormError> {
    let solver = Solver::default();
    if !g.is_nonneg_convex_vanishing() {
        return Err(NormError::Precondition(format!("{g} must be increasing convex with g(0) = 0")));
    }
    if !solver.is_psd(x, 1e-9)? || !solver.is_psd(y, 1e-9)? {
        return Err(NormError::Precondition("X and Y must be positive semidefinite".into()));
    }
    let base = ky_fan_dominance_with(&solver, x, y, tol)?;
    if !base.holds {
        return Err(NormError::Precondition(format!(
            "X is not Ky Fan dominated by Y (margin {:e} at k = {})",
            base.min_margin, base.binding_k
        )));
    }
    let gx = solver.apply(x, g)?;
    let gy = solver.apply(y, g)?;
    ky_fan_dominance_with(&solver, &gx, &gy, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;

    fn diag(d: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diag(d)
    }

    #[test]
    fn norm_examples() {
        let m = diag(&[3.0, 1.0]);
        assert_eq!(norm(&m, NormSpec::KyFan { k: 1 }).unwrap(), 3.0);
        assert_eq!(norm(&m, NormSpec::KyFan { k: 2 }).unwrap(), 4.0);
        assert!(matches!(norm(&m, NormSpec::KyFan { k: 3 }), Err(NormError::KOutOfRange { k: 3, n: 2 })));
        let ones = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!((norm(&ones, NormSpec::Schatten { p: 2.0 }).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(norm(&ones, NormSpec::Schatten { p: 0.5 }), Err(NormError::InvalidExponent(_))));
    }

    #[test]
    fn dominance_examples() {
        let d = ky_fan_dominance(&diag(&[1.0, 1.0]), &diag(&[2.0, 0.0]), 1e-8).unwrap();
        assert!(d.holds);
        assert_eq!(d.margins, vec![1.0, 0.0]);
        let d = ky_fan_dominance(&diag(&[2.0, 0.0]), &diag(&[1.0, 1.0]), 1e-8).unwrap();
        assert!(!d.holds);
        assert_eq!(d.margins, vec![-1.0, 0.0]);
        assert_eq!(d.binding_k, 1);
        assert!(ky_fan_dominance(&diag(&[1.0]), &diag(&[1.0, 2.0]), 1e-8).is_err());
    }

    #[test]
    fn majorization_examples() {
        assert!(weak_majorization(&[1.0, 1.0], &[2.0, 0.0]).unwrap());
        assert!(!weak_majorization(&[2.0, 0.0], &[1.0, 1.0]).unwrap());
        assert!(weak_majorization(&[0.3, 2.0, 1.0], &[0.3, 2.0, 1.0]).unwrap());
        assert!(weak_majorization(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn transfer_examples() {
        let x = HermitianMatrix::from_diag(&[1.0, 1.0]);
        let y = HermitianMatrix::from_diag(&[2.0, 0.0]);
        let d = monotone_convex_transfer_check(&x, &y, &ScalarFunction::power(2.0).unwrap(), 1e-8).unwrap();
        assert!(d.holds);
        assert!((d.margins[0] - 3.0).abs() < 1e-13 && (d.margins[1] - 2.0).abs() < 1e-13);
        let lin = monotone_convex_transfer_check(&x, &y, &ScalarFunction::affine(1.0, 0.0), 1e-8).unwrap();
        assert!(lin.holds);
        let same = monotone_convex_transfer_check(&y, &y, &ScalarFunction::angle(0.5).unwrap(), 1e-8).unwrap();
        assert!(same.holds);
        // reversed order violates the precondition
        assert!(matches!(
            monotone_convex_transfer_check(&y, &x, &ScalarFunction::power(2.0).unwrap(), 1e-8),
            Err(NormError::Precondition(_))
        ));
        assert!(matches!(
            monotone_convex_transfer_check(&x, &y, &ScalarFunction::sqrt(), 1e-8),
            Err(NormError::Precondition(_))
        ));
    }

    #[test]
    fn schatten_json_accepts_infinity() {
        let s: NormSpec = serde_json::from_str(r#"{"kind":"schatten","p":"inf"}"#).unwrap();
        assert_eq!(s, NormSpec::Schatten { p: f64::INFINITY });
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"kind":"schatten","p":"inf"}"#);
        let k: NormSpec = serde_json::from_str(r#"{"kind":"ky_fan","k":2}"#).unwrap();
        assert_eq!(k, NormSpec::KyFan { k: 2 });
        let o: NormSpec = serde_json::from_str(r#"{"kind":"operator"}"#).unwrap();
        assert_eq!(o, NormSpec::Operator);
    }
}
