//! Scalar functions the inequalities quantify over, with closed-form
//! evaluation and shape tags.
//!
//! The catalog covers powers, `log1p`, clamps `min(t, a)`, affine maps,
//! angle functions `γ_a(t) = ½(|t − a| + t − a)`, their smoothings
//! `h_r(t) = ½(√((t − a)² + r) + t − √(a² + r))`, the inverses of those
//! smoothings (operator concave), and piecewise-linear functions given
//! by nodes.

mod checks;
mod decompose;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checks::{
    check_operator_concave_sample, check_shape_on_grid, scalar_sanity, smoothing_gap, OperatorConcavityReport,
    SanityReport, SanityViolation, ShapeCheck,
};
pub use decompose::{angle_decompose, AngleDecomposition, AngleTerm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionError {
    #[error("{function} is not defined at t = {t}")]
    Domain { t: f64, function: String },
    #[error("invalid function parameters: {0}")]
    Invalid(String),
    #[error("slope decreases by {increment:e} at knot t = {knot}; function is not convex")]
    NotConvex { knot: f64, increment: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Concave,
    Convex,
    Affine,
    Neither,
}

impl Shape {
    pub fn is_concave(self) -> bool {
        matches!(self, Shape::Concave | Shape::Affine)
    }

    pub fn is_convex(self) -> bool {
        matches!(self, Shape::Convex | Shape::Affine)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `[0, ∞)`
    NonNegative,
    /// all of ℝ
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attributes {
    pub shape: Shape,
    pub value_at_zero: f64,
    /// Non-decreasing on the domain.
    pub monotone: bool,
    /// Claimed operator concavity (sample-tested, never proved).
    pub operator_concave: bool,
    pub domain: Domain,
}

/// Wire form and parameters of a catalog function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionKind {
    Power {
        p: f64,
    },
    Log1p,
    Clamp {
        a: f64,
    },
    Sqrt,
    Affine {
        alpha: f64,
        beta: f64,
    },
    Angle {
        a: f64,
    },
    Smoother {
        a: f64,
        r: f64,
    },
    #[serde(alias = "smoother-inverse")]
    SmootherInverse {
        a: f64,
        r: f64,
    },
    Pwl {
        nodes: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionKind", into = "FunctionKind")]
pub struct ScalarFunction {
    kind: FunctionKind,
    attrs: Attributes,
}

impl From<ScalarFunction> for FunctionKind {
    fn from(f: ScalarFunction) -> Self {
        f.kind
    }
}

impl TryFrom<FunctionKind> for ScalarFunction {
    type Error = FunctionError;
    fn try_from(kind: FunctionKind) -> Result<Self, FunctionError> {
        ScalarFunction::new(kind)
    }
}

fn finite(name: &str, v: f64) -> Result<(), FunctionError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(FunctionError::Invalid(format!("{name} must be finite")))
    }
}

impl ScalarFunction {
    /// Validates parameters and derives the attribute tags.
    pub fn new(kind: FunctionKind) -> Result<Self, FunctionError> {
        use FunctionKind::*;
        let attrs = match &kind {
            Power { p } => {
                finite("p", *p)?;
                if *p <= 0.0 {
                    return Err(FunctionError::Invalid(format!("power exponent must be positive, got {p}")));
                }
                let concave = *p <= 1.0;
                Attributes {
                    shape: if *p == 1.0 {
                        Shape::Affine
                    } else if concave {
                        Shape::Concave
                    } else {
                        Shape::Convex
                    },
                    value_at_zero: 0.0,
                    monotone: true,
                    operator_concave: concave,
                    domain: Domain::NonNegative,
                }
            }
            Sqrt | Log1p => Attributes {
                shape: Shape::Concave,
                value_at_zero: 0.0,
                monotone: true,
                operator_concave: true,
                domain: Domain::NonNegative,
            },
            Clamp { a } => {
                finite("a", *a)?;
                Attributes {
                    shape: Shape::Concave,
                    value_at_zero: a.min(0.0),
                    monotone: true,
                    operator_concave: false,
                    domain: Domain::Real,
                }
            }
            Affine { alpha, beta } => {
                finite("alpha", *alpha)?;
                finite("beta", *beta)?;
                Attributes {
                    shape: Shape::Affine,
                    value_at_zero: *beta,
                    monotone: *alpha >= 0.0,
                    operator_concave: true,
                    domain: Domain::Real,
                }
            }
            Angle { a } => {
                finite("a", *a)?;
                if *a < 0.0 {
                    return Err(FunctionError::Invalid(format!("angle knot must be >= 0, got {a}")));
                }
                Attributes {
                    shape: Shape::Convex,
                    value_at_zero: 0.0,
                    monotone: true,
                    operator_concave: false,
                    domain: Domain::NonNegative,
                }
            }
            Smoother { a, r } | SmootherInverse { a, r } => {
                finite("a", *a)?;
                finite("r", *r)?;
                if *a < 0.0 || *r <= 0.0 {
                    return Err(FunctionError::Invalid(format!(
                        "smoother needs a >= 0 and r > 0, got a = {a}, r = {r}"
                    )));
                }
                let inverse = matches!(kind, SmootherInverse { .. });
                Attributes {
                    shape: if inverse { Shape::Concave } else { Shape::Convex },
                    value_at_zero: 0.0,
                    monotone: true,
                    operator_concave: inverse,
                    domain: Domain::NonNegative,
                }
            }
            Pwl { nodes } => pwl_attributes(nodes)?,
        };
        let mut f = Self { kind, attrs };
        if let Pwl { .. } = f.kind {
            f.attrs.value_at_zero = f.eval_unchecked(0.0);
        }
        Ok(f)
    }

    pub fn power(p: f64) -> Result<Self, FunctionError> {
        Self::new(FunctionKind::Power { p })
    }

    pub fn sqrt() -> Self {
        Self::new(FunctionKind::Sqrt).unwrap()
    }

    pub fn log1p() -> Self {
        Self::new(FunctionKind::Log1p).unwrap()
    }

    pub fn clamp(a: f64) -> Self {
        Self::new(FunctionKind::Clamp { a }).expect("finite clamp level")
    }

    pub fn affine(alpha: f64, beta: f64) -> Self {
        Self::new(FunctionKind::Affine { alpha, beta }).expect("finite affine coefficients")
    }

    pub fn angle(a: f64) -> Result<Self, FunctionError> {
        Self::new(FunctionKind::Angle { a })
    }

    pub fn smoother(a: f64, r: f64) -> Result<Self, FunctionError> {
        Self::new(FunctionKind::Smoother { a, r })
    }

    pub fn smoother_inverse(a: f64, r: f64) -> Result<Self, FunctionError> {
        Self::new(FunctionKind::SmootherInverse { a, r })
    }

    pub fn pwl(nodes: Vec<[f64; 2]>) -> Result<Self, FunctionError> {
        Self::new(FunctionKind::Pwl { nodes })
    }

    /// Overrides the shape tag. Used to exercise the shape guards.
    pub fn with_shape(mut self, shape: Shape) -> Self {
        self.attrs.shape = shape;
        self
    }

    /// Overrides the operator-concavity tag.
    pub fn with_operator_concave(mut self, flag: bool) -> Self {
        self.attrs.operator_concave = flag;
        self
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn attrs(&self) -> &Attributes {
        &self.attrs
    }

    pub fn shape(&self) -> Shape {
        self.attrs.shape
    }

    pub fn domain(&self) -> Domain {
        self.attrs.domain
    }

    pub fn value_at_zero(&self) -> f64 {
        self.attrs.value_at_zero
    }

    pub fn is_operator_concave(&self) -> bool {
        self.attrs.operator_concave
    }

    /// Concave, non-negative on `[0, ∞)`: concave tag, `f(0) ≥ 0`, non-decreasing.
    pub fn is_nonneg_concave(&self) -> bool {
        self.attrs.shape.is_concave() && self.attrs.value_at_zero >= 0.0 && self.attrs.monotone
    }

    /// Convex, non-negative on `[0, ∞)` with `g(0) = 0`.
    pub fn is_nonneg_convex_vanishing(&self) -> bool {
        self.attrs.shape.is_convex() && self.attrs.value_at_zero.abs() <= 1e-12 && self.attrs.monotone
    }

    pub fn eval(&self, t: f64) -> Result<f64, FunctionError> {
        if !t.is_finite() || (self.attrs.domain == Domain::NonNegative && t < 0.0) {
            return Err(FunctionError::Domain { t, function: self.to_string() });
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        use FunctionKind::*;
        match &self.kind {
            Power { p } => {
                if t == 0.0 {
                    0.0
                } else {
                    t.powf(*p)
                }
            }
            Sqrt => t.sqrt(),
            Log1p => t.ln_1p(),
            Clamp { a } => t.min(*a),
            Affine { alpha, beta } => alpha * t + beta,
            Angle { a } => 0.5 * ((t - a).abs() + t - a),
            Smoother { a, r } => smoother_eval(*a, *r, t),
            SmootherInverse { a, r } => smoother_inverse_eval(*a, *r, t),
            Pwl { nodes } => pwl_eval(nodes, t),
        }
    }
}

/// `√(a² + r) − a`, computed without cancellation.
fn smoother_offset(a: f64, r: f64) -> f64 {
    r / ((a * a + r).sqrt() + a)
}

/// `½(√((t − a)² + r) + t − √(a² + r))`, rearranged so that no
/// catastrophic cancellation occurs on either side of the knot.
fn smoother_eval(a: f64, r: f64, t: f64) -> f64 {
    let s = ((t - a) * (t - a) + r).sqrt();
    let k = smoother_offset(a, r);
    if t <= a {
        0.5 * (r / (s + (a - t)) - k)
    } else {
        0.5 * (s + (t - a) - k)
    }
}

/// `t − (r/2)/(2t + √(a² + r) − a) + (√(a² + r) + a)/2`.
fn smoother_inverse_eval(a: f64, r: f64, t: f64) -> f64 {
    let c = (a * a + r).sqrt();
    let k = smoother_offset(a, r);
    t - 0.5 * r / (2.0 * t + k) + 0.5 * (c + a)
}

fn pwl_eval(nodes: &[[f64; 2]], t: f64) -> f64 {
    let last = nodes.len() - 1;
    // segment index: first i with t <= nodes[i+1].t, clamped to end segments
    let i = match nodes.iter().position(|n| t <= n[0]) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => last - 1,
    };
    let [t0, y0] = nodes[i];
    let [t1, y1] = nodes[i + 1];
    if t == t0 {
        return y0;
    }
    if t == t1 {
        return y1;
    }
    y0 + (y1 - y0) * (t - t0) / (t1 - t0)
}

fn pwl_slopes(nodes: &[[f64; 2]]) -> Vec<f64> {
    nodes.windows(2).map(|w| (w[1][1] - w[0][1]) / (w[1][0] - w[0][0])).collect()
}

fn pwl_attributes(nodes: &[[f64; 2]]) -> Result<Attributes, FunctionError> {
    if nodes.len() < 2 {
        return Err(FunctionError::Invalid("pwl needs at least two nodes".into()));
    }
    for n in nodes {
        finite("pwl node", n[0])?;
        finite("pwl node", n[1])?;
    }
    if nodes.windows(2).any(|w| w[1][0] <= w[0][0]) {
        return Err(FunctionError::Invalid("pwl nodes must be strictly increasing in t".into()));
    }
    let slopes = pwl_slopes(nodes);
    let scale = slopes.iter().fold(1.0_f64, |m, s| m.max(s.abs()));
    let tol = 1e-12 * scale;
    let non_increasing = slopes.windows(2).all(|w| w[1] <= w[0] + tol);
    let non_decreasing = slopes.windows(2).all(|w| w[1] >= w[0] - tol);
    let shape = match (non_increasing, non_decreasing) {
        (true, true) => Shape::Affine,
        (true, false) => Shape::Concave,
        (false, true) => Shape::Convex,
        (false, false) => Shape::Neither,
    };
    Ok(Attributes {
        shape,
        value_at_zero: 0.0, // filled in by the caller
        monotone: slopes.iter().all(|&s| s >= 0.0),
        operator_concave: shape == Shape::Affine,
        domain: if nodes[0][0] < 0.0 { Domain::Real } else { Domain::NonNegative },
    })
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FunctionKind::*;
        match &self.kind {
            Power { p } => write!(f, "t^{p}"),
            Sqrt => write!(f, "sqrt"),
            Log1p => write!(f, "log1p"),
            Clamp { a } => write!(f, "min(t, {a})"),
            Affine { alpha, beta } => write!(f, "{alpha}t + {beta}"),
            Angle { a } => write!(f, "angle(a={a})"),
            Smoother { a, r } => write!(f, "smoother(a={a}, r={r})"),
            SmootherInverse { a, r } => write!(f, "smoother_inverse(a={a}, r={r})"),
            Pwl { nodes } => write!(f, "pwl({} nodes)", nodes.len()),
        }
    }
}

/// The finite generating catalog.
pub mod catalog {
    use super::ScalarFunction;

    /// Non-negative concave functions on `[0, ∞)`, including some with `f(0) > 0`.
    pub fn concave() -> Vec<ScalarFunction> {
        vec![
            ScalarFunction::sqrt(),
            ScalarFunction::power(0.3).unwrap(),
            ScalarFunction::power(0.7).unwrap(),
            ScalarFunction::log1p(),
            ScalarFunction::clamp(0.5),
            ScalarFunction::clamp(1.0),
            ScalarFunction::smoother_inverse(1.0, 0.5).unwrap(),
            ScalarFunction::smoother_inverse(0.5, 0.01).unwrap(),
            ScalarFunction::affine(0.5, 1.0),
            ScalarFunction::pwl(vec![[0.0, 0.0], [0.5, 0.8], [1.5, 1.4], [4.0, 1.9]]).unwrap(),
            ScalarFunction::pwl(vec![[0.0, 0.5], [1.0, 1.5], [3.0, 2.0]]).unwrap(),
        ]
    }

    /// Non-negative convex functions on `[0, ∞)` vanishing at 0.
    pub fn convex() -> Vec<ScalarFunction> {
        vec![
            ScalarFunction::power(2.0).unwrap(),
            ScalarFunction::power(2.5).unwrap(),
            ScalarFunction::power(3.0).unwrap(),
            ScalarFunction::angle(0.5).unwrap(),
            ScalarFunction::angle(1.0).unwrap(),
            ScalarFunction::smoother(1.0, 0.01).unwrap(),
            ScalarFunction::smoother(0.5, 1e-4).unwrap(),
            ScalarFunction::affine(2.0, 0.0),
            ScalarFunction::pwl(vec![[0.0, 0.0], [1.0, 0.5], [2.0, 2.0], [4.0, 7.0]]).unwrap(),
        ]
    }

    /// Entries tagged operator concave with `f(0) ≥ 0`.
    pub fn operator_concave() -> Vec<ScalarFunction> {
        vec![
            ScalarFunction::sqrt(),
            ScalarFunction::power(0.3).unwrap(),
            ScalarFunction::power(0.7).unwrap(),
            ScalarFunction::log1p(),
            ScalarFunction::smoother_inverse(1.0, 0.5).unwrap(),
            ScalarFunction::smoother_inverse(0.5, 0.01).unwrap(),
            ScalarFunction::affine(0.5, 1.0),
        ]
    }

    /// Concave functions on all of ℝ with `f(0) ≥ 0`.
    pub fn concave_on_reals() -> Vec<ScalarFunction> {
        vec![
            ScalarFunction::clamp(0.0),
            ScalarFunction::clamp(1.0),
            ScalarFunction::affine(0.5, 0.2),
            ScalarFunction::pwl(vec![[-2.0, -3.0], [-1.0, -1.0], [0.0, 0.0], [1.0, 0.6], [3.0, 1.0]]).unwrap(),
        ]
    }

    /// Every catalog entry.
    pub fn all() -> Vec<ScalarFunction> {
        let mut v = concave();
        v.extend(convex());
        v.extend(concave_on_reals());
        v
    }
}
