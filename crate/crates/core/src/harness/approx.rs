use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::scalar::ScalarFunction;

/// `points` equally spaced values from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.lo + step * i as f64).collect()
    }
}

/// Parses `lo:hi:steps` into a grid of `steps + 1` points.
pub fn parse_grid(s: &str) -> Result<Grid, HarnessError> {
    let bad = || HarnessError::Invalid(format!("grid {s:?} must be lo:hi:steps"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo || steps == 0 {
        return Err(bad());
    }
    Ok(Grid { lo, hi, points: steps + 1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxTable {
    pub a: f64,
    pub rs: Vec<f64>,
    pub t: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `h[i][j] = h_{rᵢ}(tⱼ)`.
    pub h: Vec<Vec<f64>>,
    /// `sup_t |h_r(t) − γ_a(t)|` per `r`.
    pub gaps: Vec<f64>,
}

impl ApproxTable {
    /// Whether every gap is within its bound `√r`.
    pub fn within_bounds(&self) -> bool {
        self.gaps.iter().zip(&self.rs).all(|(g, r)| *g <= r.sqrt())
    }

    /// Columns `t, gamma, h_r=…` followed by one `# sup_gap` line per `r`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,gamma");
        for r in &self.rs {
            let _ = write!(out, ",h_r={r:e}");
        }
        out.push('\n');
        for (j, t) in self.t.iter().enumerate() {
            let _ = write!(out, "{t},{}", self.gamma[j]);
            for row in &self.h {
                let _ = write!(out, ",{}", row[j]);
            }
            out.push('\n');
        }
        for (r, g) in self.rs.iter().zip(&self.gaps) {
            let _ = writeln!(out, "# sup_gap r={r:e} gap={g:e} bound={:e} ok={}", r.sqrt(), *g <= r.sqrt());
        }
        out
    }
}

/// Tabulates the angle function `γ_a` against its smoothings `h_r` on `grid`.
pub fn approx_table(a: f64, rs: &[f64], grid: &Grid) -> Result<ApproxTable, HarnessError> {
    let gamma_f = ScalarFunction::angle(a).map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let t = grid.values();
    let eval = |f: &ScalarFunction| -> Result<Vec<f64>, HarnessError> {
        t.iter().map(|&x| f.eval(x).map_err(|e| HarnessError::Invalid(e.to_string()))).collect()
    };
    let gamma = eval(&gamma_f)?;
    let mut h = Vec::with_capacity(rs.len());
    let mut gaps = Vec::with_capacity(rs.len());
    for &r in rs {
        let hf = ScalarFunction::smoother(a, r).map_err(|e| HarnessError::Invalid(e.to_string()))?;
        let row = eval(&hf)?;
        gaps.push(row.iter().zip(&gamma).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())));
        h.push(row);
    }
    Ok(ApproxTable { a, rs: rs.to_vec(), t, gamma, h, gaps })
}
