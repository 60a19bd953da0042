use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HermitianMatrix};
use super::LinalgError;

/// Default off-diagonal stopping threshold, relative to `‖H‖_F`.
pub const DEFAULT_THRESHOLD: f64 = 1e-13;
/// Threshold used for the tighter re-verification pass.
pub const TIGHT_THRESHOLD: f64 = 1e-15;
pub const MAX_SWEEPS: usize = 64;

/// Eigenvalues in non-increasing order with a unitary eigenbasis;
/// column `j` of `vectors` pairs with `values[j]`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    /// `U diag(g(λ)) U*`.
    pub fn reassemble(&self, g: impl Fn(f64) -> f64) -> HermitianMatrix {
        let vals: Vec<f64> = self.values.iter().map(|&l| g(l)).collect();
        assemble(&self.vectors, &vals)
    }
}

/// `U diag(vals) U*` for a square `U`.
pub fn assemble(u: &ComplexMatrix, vals: &[f64]) -> HermitianMatrix {
    let n = u.rows();
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &v) in vals.iter().enumerate() {
                if v != 0.0 {
                    acc += u[(i, k)] * u[(j, k)].conj() * v;
                }
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc.conj();
        }
    }
    HermitianMatrix::from_matrix(&out)
}

/// Cyclic complex Jacobi eigensolver with a configurable stopping threshold.
///
/// Sweeps visit pairs `(p, q)`, `p < q`, in row-major order. Each rotation is
/// the composition of a phase `diag(1, e^{-iφ})`, which makes the pivot real,
/// with a real Jacobi rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solver {
    pub threshold: f64,
    pub max_sweeps: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Self { threshold: DEFAULT_THRESHOLD, max_sweeps: MAX_SWEEPS }
    }
}

impl Solver {
    pub fn tight() -> Self {
        Self { threshold: TIGHT_THRESHOLD, ..Self::default() }
    }

    pub fn eig(&self, h: &HermitianMatrix) -> Result<Spectrum, LinalgError> {
        let n = h.n();
        let mut a = h.as_matrix().clone();
        let mut v = ComplexMatrix::identity(n);
        let target = self.threshold * h.frobenius_norm();

        let mut converged = false;
        for _sweep in 0..self.max_sweeps {
            if off_norm(&a) <= target {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged {
            let residual = off_norm(&a);
            if residual > target {
                return Err(LinalgError::NoConvergence { sweeps: self.max_sweeps, residual });
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        // stable: equal eigenvalues keep their diagonal position
        order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
        let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut vectors = ComplexMatrix::zeros(n);
        for (col, &src) in order.iter().enumerate() {
            let (lead, phase) = leading_phase(&v, src);
            for row in 0..n {
                vectors[(row, col)] = v[(row, src)] * phase;
            }
            // exact: z · z̄/|z| can leave round-off in the imaginary part
            vectors[(lead, col)] = Complex64::new(v[(lead, src)].norm(), 0.0);
        }
        Ok(Spectrum { values, vectors })
    }

    pub fn eigenvalues(&self, h: &HermitianMatrix) -> Result<Vec<f64>, LinalgError> {
        Ok(self.eig(h)?.values)
    }
}

/// Frobenius norm of the strictly off-diagonal part.
fn off_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Phase that makes the first non-negligible component of column `col`
/// real and non-negative, with that component's row.
fn leading_phase(v: &ComplexMatrix, col: usize) -> (usize, Complex64) {
    let n = v.rows();
    for row in 0..n {
        let z = v[(row, col)];
        if z.norm() > 1e-12 {
            return (row, z.conj() / z.norm());
        }
    }
    (0, Complex64::new(1.0, 0.0))
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // e^{iφ} = apq / |apq|
    let phase = apq / r;

    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_infinite() {
        0.0
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    if t == 0.0 {
        return;
    }
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = identity except J_pp = c, J_pq = s, J_qp = -s e^{-iφ}, J_qq = c e^{-iφ}
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = a.rows();
    // A <- A J ; V <- V J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
    // A <- J* A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// Eigendecomposition with the default solver.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<Spectrum, LinalgError> {
    Solver::default().eig(h)
}
