use serde::{Deserialize, Serialize};

use super::{FunctionError, ScalarFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleTerm {
    pub knot: f64,
    pub coefficient: f64,
}

/// `g̃(t) = λ₀·t + Σ cᵢ·γ_{aᵢ}(t)` with all `cᵢ ≥ 0` and strictly
/// increasing knots `aᵢ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleDecomposition {
    pub lambda0: f64,
    pub terms: Vec<AngleTerm>,
}

impl AngleDecomposition {
    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .fold(self.lambda0 * t, |acc, term| acc + term.coefficient * 0.5 * ((t - term.knot).abs() + t - term.knot))
    }
}

/// Decomposes the piecewise-linear interpolant of a convex `g` with
/// `g(0) = 0` on `grid` into a non-negative combination of angle functions.
///
/// The initial slope is `(g(t₁) − g(0))/t₁`; the coefficient at each
/// interior knot is the slope increment across it. Increments more negative
/// than `1e-9 · scale` are a shape error; smaller negative round-off is
/// clamped to zero and zero increments are dropped.
pub fn angle_decompose(g: &ScalarFunction, grid: &[f64]) -> Result<AngleDecomposition, FunctionError> {
    if grid.len() < 2 || grid[0] != 0.0 {
        return Err(FunctionError::Invalid("grid must start at 0 and have at least two knots".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FunctionError::Invalid("grid knots must be strictly increasing".into()));
    }
    let values = grid.iter().map(|&t| g.eval(t)).collect::<Result<Vec<_>, _>>()?;
    if values[0].abs() > 1e-12 {
        return Err(FunctionError::Precondition(format!("g(0) = {} but must vanish", values[0])));
    }
    let slopes: Vec<f64> = grid.windows(2).zip(values.windows(2)).map(|(t, v)| (v[1] - v[0]) / (t[1] - t[0])).collect();
    let scale = slopes.iter().fold(1.0_f64, |m, s| m.max(s.abs()));

    let mut terms = Vec::new();
    for i in 1..slopes.len() {
        let increment = slopes[i] - slopes[i - 1];
        if increment < -1e-9 * scale {
            return Err(FunctionError::NotConvex { knot: grid[i], increment });
        }
        if increment > 1e-15 * scale {
            terms.push(AngleTerm { knot: grid[i], coefficient: increment });
        }
    }
    Ok(AngleDecomposition { lambda0: slopes[0], terms })
}
