use serde::{Deserialize, Serialize};

use super::{FunctionError, ScalarFunction, Shape};
use crate::generators::{random_psd, Stream};
use crate::linalg::{HermitianMatrix, LinalgError, Solver};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeCheck {
    pub ok: bool,
    /// First offending triple `(tᵢ₋₁, tᵢ, tᵢ₊₁)`.
    pub witness: Option<[f64; 3]>,
}

/// Checks the shape tag of `f` against chord-slope monotonicity on `grid`.
/// Functions tagged [`Shape::Neither`] pass trivially.
pub fn check_shape_on_grid(f: &ScalarFunction, grid: &[f64]) -> Result<ShapeCheck, FunctionError> {
    if grid.len() < 3 {
        return Err(FunctionError::Invalid("shape check needs at least three points".into()));
    }
    let values = grid.iter().map(|&t| f.eval(t)).collect::<Result<Vec<_>, _>>()?;
    for i in 1..grid.len() - 1 {
        let left = (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]);
        let right = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
        let tol = 1e-9 * left.abs().max(right.abs()).max(1.0);
        let ok = match f.shape() {
            Shape::Concave => right <= left + tol,
            Shape::Convex => right >= left - tol,
            Shape::Affine => (right - left).abs() <= tol,
            Shape::Neither => true,
        };
        if !ok {
            return Ok(ShapeCheck { ok: false, witness: Some([grid[i - 1], grid[i], grid[i + 1]]) });
        }
    }
    Ok(ShapeCheck { ok: true, witness: None })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorConcavityReport {
    pub ok: bool,
    pub trials: usize,
    /// Smallest `λ_min(f((A+B)/2) − (f(A)+f(B))/2)` relative to its scale.
    pub worst_margin: f64,
    pub witness: Option<(HermitianMatrix, HermitianMatrix)>,
}

/// Midpoint operator concavity `f((A+B)/2) ⪰ (f(A)+f(B))/2` on random PSD
/// pairs drawn from the trial streams of `seed`.
pub fn check_operator_concave_sample(
    f: &ScalarFunction,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<OperatorConcavityReport, FunctionError> {
    if !f.is_operator_concave() {
        return Err(FunctionError::Precondition(format!("{f} is not tagged operator concave")));
    }
    let solver = Solver::default();
    let lin = |e: LinalgError| FunctionError::Precondition(e.to_string());
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for trial in 0..trials {
        let mut rng = Stream::for_trial(seed, trial as u64);
        let a = random_psd(&mut rng, n);
        let b = random_psd(&mut rng, n);
        let mid = solver.apply(&a.add(&b).scale(0.5), f).map_err(lin)?;
        let avg = solver.apply(&a, f).map_err(lin)?.add(&solver.apply(&b, f).map_err(lin)?).scale(0.5);
        let check = solver.loewner_leq(&avg, &mid, 1e-8).map_err(lin)?;
        let rel = check.margin / check.scale;
        // witness: the worst failing pair
        if rel < worst {
            worst = rel;
            if !check.holds {
                witness = Some((a, b));
            }
        }
    }
    Ok(OperatorConcavityReport { ok: witness.is_none(), trials, worst_margin: worst, witness })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityViolation {
    /// `"homogeneity"` for `f(za) ≤ z f(a)`, `"subadditivity"` for `f(a+b) ≤ f(a) + f(b)`.
    pub inequality: String,
    pub a: f64,
    pub b: f64,
    pub z: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityReport {
    pub ok: bool,
    pub checked: usize,
    pub violations: Vec<SanityViolation>,
}

const SANITY_POINTS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 10.0];

/// Scalar cases of the congruence and subadditivity inequalities:
/// `f(za) ≤ z f(a)` for `z ≥ 1` and `f(a+b) ≤ f(a) + f(b)`, over a fixed grid.
pub fn scalar_sanity(f: &ScalarFunction) -> Result<SanityReport, FunctionError> {
    if !f.is_nonneg_concave() {
        return Err(FunctionError::Precondition(format!("{f} must be non-negative and concave")));
    }
    let zs = [1.0, 1.5, 2.0, 4.0, 10.0];
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut record = |inequality: &str, a: f64, b: f64, z: f64, lhs: f64, rhs: f64| {
        checked += 1;
        if lhs > rhs + 1e-12 * rhs.abs().max(1.0) {
            violations.push(SanityViolation { inequality: inequality.into(), a, b, z, lhs, rhs });
        }
    };
    for &a in &SANITY_POINTS {
        let fa = f.eval(a)?;
        for &z in &zs {
            record("homogeneity", a, 0.0, z, f.eval(z * a)?, z * fa);
        }
        for &b in &SANITY_POINTS {
            record("subadditivity", a, b, 1.0, f.eval(a + b)?, fa + f.eval(b)?);
        }
    }
    Ok(SanityReport { ok: violations.is_empty(), checked, violations })
}

/// `max |h_r(t) − γ_a(t)|` over the given points.
pub fn smoothing_gap(a: f64, r: f64, points: &[f64]) -> Result<f64, FunctionError> {
    let h = ScalarFunction::smoother(a, r)?;
    let g = ScalarFunction::angle(a)?;
    points.iter().try_fold(0.0_f64, |m, &t| Ok(m.max((h.eval(t)? - g.eval(t)?).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn shape_examples() {
        assert!(check_shape_on_grid(&ScalarFunction::sqrt(), &grid(0.1, 10.0, 100)).unwrap().ok);
        let sq = ScalarFunction::power(2.0).unwrap();
        assert!(check_shape_on_grid(&sq, &grid(0.0, 10.0, 11)).unwrap().ok);
        let mistag = sq.with_shape(Shape::Concave);
        let c = check_shape_on_grid(&mistag, &grid(0.0, 10.0, 11)).unwrap();
        assert!(!c.ok);
        assert_eq!(c.witness, Some([0.0, 1.0, 2.0]));
    }

    #[test]
    fn operator_concavity_examples() {
        let r = check_operator_concave_sample(&ScalarFunction::sqrt(), 2, 200, 1).unwrap();
        assert!(r.ok, "worst margin {}", r.worst_margin);
        let inv = ScalarFunction::smoother_inverse(1.0, 0.5).unwrap();
        assert!(check_operator_concave_sample(&inv, 2, 200, 2).unwrap().ok);
        let mistag = ScalarFunction::power(2.0).unwrap().with_operator_concave(true);
        let r = check_operator_concave_sample(&mistag, 2, 200, 3).unwrap();
        assert!(!r.ok && r.worst_margin < 0.0);
        let (a, b) = r.witness.unwrap();
        assert_eq!(a.n(), 2);
        assert_eq!(b.n(), 2);
        assert!(check_operator_concave_sample(&ScalarFunction::power(2.0).unwrap(), 2, 1, 0).is_err());
    }

    #[test]
    fn sanity_examples() {
        let f = ScalarFunction::sqrt();
        assert!(f.eval(16.0).unwrap() <= 4.0 * f.eval(4.0).unwrap());
        assert!(f.eval(2.0).unwrap() <= 2.0 * f.eval(1.0).unwrap());
        let r = scalar_sanity(&ScalarFunction::log1p()).unwrap();
        assert!(r.ok && r.checked == 50);
        for f in crate::scalar::catalog::concave() {
            assert!(scalar_sanity(&f).unwrap().ok, "{f}");
        }
        assert!(scalar_sanity(&ScalarFunction::power(2.0).unwrap()).is_err());
    }
}
