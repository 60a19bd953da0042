use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::linalg::{ComplexMatrix, HermitianMatrix, Solver};

/// A unitary `V` with `V R V* ⪯ L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryCertificate {
    pub v: ComplexMatrix,
    /// `λ_min(L − V R V*)` from a fresh eigendecomposition.
    pub residual: f64,
    /// `‖V*V − I‖_F`.
    pub unitarity_defect: f64,
    /// `max(1, ‖L‖_op, ‖R‖_op)`.
    pub scale: f64,
}

impl UnitaryCertificate {
    /// Re-checks the certificate from scratch against `L` and `R`.
    pub fn verify(&self, l: &HermitianMatrix, r: &HermitianMatrix, tol: f64) -> Result<bool, EngineError> {
        let (residual, defect, scale) = measure(&Solver::default(), &self.v, l, r)?;
        Ok(defect <= 1e-9 && residual >= -tol * scale)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Unitary(UnitaryCertificate),
    /// Top-k spectral projection used by the trace comparison.
    Projection {
        e: HermitianMatrix,
        rank: usize,
    },
    /// Unitaries `U, V` with `f(A+B) ⪯ U f(A) U* + V f(B) V*`.
    UnitaryPair {
        u: ComplexMatrix,
        v: ComplexMatrix,
        margin: f64,
    },
}

fn measure(
    solver: &Solver,
    v: &ComplexMatrix,
    l: &HermitianMatrix,
    r: &HermitianMatrix,
) -> Result<(f64, f64, f64), EngineError> {
    let n = l.n();
    let rotated = HermitianMatrix::from_matrix(&(&(v * r.as_matrix()) * &v.adjoint()));
    let check = solver.loewner_leq(&rotated, l, 0.0)?;
    let defect = (&v.adjoint() * v).distance(&ComplexMatrix::identity(n));
    let scale = check.scale.max(solver.op_norm(r)?);
    Ok((check.margin, defect, scale))
}

/// Aligns the sorted eigenbases of `L` and `R`: `V = U_L U_R*`, which turns
/// entrywise eigenvalue dominance `λⱼ(L) ≥ λⱼ(R)` into `V R V* ⪯ L`.
pub fn dominance_unitary(l: &HermitianMatrix, r: &HermitianMatrix) -> Result<UnitaryCertificate, EngineError> {
    dominance_unitary_with(&Solver::default(), l, r, 1e-9, 1e-8)
}

/// As [`dominance_unitary`], with the precondition slack `pre_tol` and the
/// residual bound `post_tol`, both relative to `max(1, ‖L‖_op, ‖R‖_op)`.
pub fn dominance_unitary_with(
    solver: &Solver,
    l: &HermitianMatrix,
    r: &HermitianMatrix,
    pre_tol: f64,
    post_tol: f64,
) -> Result<UnitaryCertificate, EngineError> {
    if l.n() != r.n() {
        return Err(crate::linalg::LinalgError::DimensionMismatch { left: l.n(), right: r.n() }.into());
    }
    let sl = solver.eig(l)?;
    let sr = solver.eig(r)?;
    let norm = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let scale = 1.0_f64.max(norm(&sl.values)).max(norm(&sr.values));
    for (j, (a, b)) in sl.values.iter().zip(&sr.values).enumerate() {
        if a - b < -pre_tol * scale {
            return Err(EngineError::Dominance { index: j + 1, deficit: a - b });
        }
    }
    let v = &sl.vectors * &sr.vectors.adjoint();
    let (residual, unitarity_defect, scale) = measure(solver, &v, l, r)?;
    if unitarity_defect > 1e-9 || residual < -post_tol * scale {
        return Err(EngineError::Certificate { residual, defect: unitarity_defect });
    }
    Ok(UnitaryCertificate { v, residual, unitarity_defect, scale })
}
