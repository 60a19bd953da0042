use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::generators::{gaussian_matrix, random_unitary, Stream};
use crate::linalg::{phase_normalized_q, ComplexMatrix, HermitianMatrix, Solver};
use crate::scalar::ScalarFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    /// `λ_min(U f(A) U* + V f(B) V* − f(A+B))`, re-verified.
    pub margin: f64,
    pub scale: f64,
    pub iterations: usize,
}

struct Problem {
    fa: HermitianMatrix,
    fb: HermitianMatrix,
    s: HermitianMatrix,
    solver: Solver,
}

impl Problem {
    fn rotate(u: &ComplexMatrix, h: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::from_matrix(&(&(u * h.as_matrix()) * &u.adjoint()))
    }

    fn margin(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64, EngineError> {
        let d = Self::rotate(u, &self.fa).add(&Self::rotate(v, &self.fb)).sub(&self.s);
        Ok(*self.solver.eigenvalues(&d)?.last().unwrap())
    }

    /// The `U` maximizing `λ_min(U F U* − T)`: it maps the sorted eigenbasis
    /// of `F` onto that of `T`.
    fn align(&self, f: &HermitianMatrix, t: &HermitianMatrix) -> Result<ComplexMatrix, EngineError> {
        let sf = self.solver.eig(f)?;
        let st = self.solver.eig(t)?;
        Ok(&st.vectors * &sf.vectors.adjoint())
    }

    /// Alternating alignment from `(u, v)` until the margin stops improving.
    fn alternate(
        &self,
        mut u: ComplexMatrix,
        mut v: ComplexMatrix,
        budget: &mut usize,
    ) -> Result<(ComplexMatrix, ComplexMatrix, f64), EngineError> {
        let mut best = self.margin(&u, &v)?;
        while *budget > 0 {
            *budget -= 1;
            let nu = self.align(&self.fa, &self.s.sub(&Self::rotate(&v, &self.fb)))?;
            let nv = self.align(&self.fb, &self.s.sub(&Self::rotate(&nu, &self.fa)))?;
            let m = self.margin(&nu, &nv)?;
            if m <= best + 1e-15 * best.abs().max(1.0) {
                if m > best {
                    (u, v, best) = (nu, nv, m);
                }
                break;
            }
            (u, v, best) = (nu, nv, m);
        }
        Ok((u, v, best))
    }
}

/// Unitary near the identity: the phase-normalized Q factor of `I + step·G`.
fn nudge(rng: &mut Stream, n: usize, step: f64) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        id + g[(i, j)] * step
    });
    phase_normalized_q(&m)
}

/// Searches for unitaries `U, V` with `f(A+B) ⪯ U f(A) U* + V f(B) V*`.
///
/// Starts from `U = V = I` and from random unitaries, improves each start by
/// alternating eigenbasis alignment, then perturbs the best pair with
/// near-identity unitaries and adapts the step size. `budget` bounds the
/// total number of margin evaluations. Returns `None` unless a pair is
/// found whose re-verified margin is `≥ −1e-8 · scale`; absence of a
/// witness says nothing about existence.
pub fn search_eq6_witness(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    f: &ScalarFunction,
    budget: usize,
    seed: u64,
) -> Result<Option<WitnessPair>, EngineError> {
    let solver = Solver::default();
    let n = a.n();
    if b.n() != n {
        return Err(crate::linalg::LinalgError::DimensionMismatch { left: n, right: b.n() }.into());
    }
    let p = Problem { fa: solver.apply(a, f)?, fb: solver.apply(b, f)?, s: solver.apply(&a.add(b), f)?, solver };
    let norm = |h: &HermitianMatrix| solver.op_norm(h.as_matrix());
    let scale = 1.0_f64.max(norm(&p.fa)?).max(norm(&p.fb)?).max(norm(&p.s)?);
    let target = -1e-8 * scale;

    let mut rng = Stream::new(seed);
    let mut remaining = budget;
    let id = ComplexMatrix::identity(n);
    let (mut bu, mut bv, mut best) = p.alternate(id.clone(), id, &mut remaining)?;
    let mut iterations = budget - remaining;

    let restarts = 4;
    for _ in 0..restarts {
        if best >= 0.0 || remaining == 0 {
            break;
        }
        let u0 = random_unitary(&mut rng, n);
        let v0 = random_unitary(&mut rng, n);
        let (u, v, m) = p.alternate(u0, v0, &mut remaining)?;
        if m > best {
            (bu, bv, best) = (u, v, m);
            iterations = budget - remaining;
        }
    }

    let mut step = 0.3;
    while best < 0.0 && remaining > 0 {
        remaining -= 1;
        let u = &nudge(&mut rng, n, step) * &bu;
        let v = &nudge(&mut rng, n, step) * &bv;
        let m = p.margin(&u, &v)?;
        if m > best {
            (bu, bv, best) = (u, v, m);
            iterations = budget - remaining;
            step = (step * 1.5).min(1.0);
        } else {
            step = (step * 0.9).max(1e-6);
        }
    }

    // independent re-verification with the tight solver
    let verified = Problem { solver: Solver::tight(), ..p }.margin(&bu, &bv)?;
    if verified >= target {
        Ok(Some(WitnessPair { u: bu, v: bv, margin: verified, scale, iterations }))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::random_psd;

    #[test]
    fn equal_summands_need_no_rotation() {
        let mut rng = Stream::new(3);
        let a = random_psd(&mut rng, 3);
        let w = search_eq6_witness(&a, &a, &ScalarFunction::sqrt(), 10, 0).unwrap().unwrap();
        assert!(w.margin >= 0.0);
    }

    #[test]
    fn commuting_diagonal_pair() {
        let a = HermitianMatrix::from_diag(&[3.0, 0.5, 0.0]);
        let b = HermitianMatrix::from_diag(&[0.0, 2.0, 1.0]);
        let w = search_eq6_witness(&a, &b, &ScalarFunction::log1p(), 100, 1).unwrap().unwrap();
        assert!(w.margin >= -1e-8 * w.scale);
    }

    #[test]
    fn random_pairs_in_dimension_two() {
        for seed in 0..20 {
            let mut rng = Stream::new(seed);
            let a = random_psd(&mut rng, 2);
            let b = random_psd(&mut rng, 2);
            let w = search_eq6_witness(&a, &b, &ScalarFunction::sqrt(), 10_000, seed).unwrap();
            assert!(w.is_some(), "seed {seed}");
        }
    }
}
