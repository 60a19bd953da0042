//! Numerical checks of norm, trace and Loewner-order inequalities for
//! concave and convex functions of positive matrices under sums and
//! congruences.
//!
//! The crate is layered: [`linalg`] (Jacobi eigensolver and functional
//! calculus), [`scalar`] (the function catalog), [`norms`] (Ky Fan and
//! Schatten norms, dominance), [`engine`] (one predicate per inequality),
//! [`generators`] (seeded ensembles and shrinking) and [`harness`]
//! (campaigns and reports).

pub mod engine;
pub mod generators;
pub mod harness;
pub mod linalg;
pub mod norms;
pub mod scalar;

pub use engine::{
    check, CheckOptions, ClaimId, EngineError, Instance, Status, Term, Tolerances, UnitaryCertificate, Verdict,
};
pub use generators::{shrink, Ensemble, GenSpec, Stream};
pub use linalg::{ComplexMatrix, HermitianMatrix, LinalgError, Solver, Spectrum};
pub use norms::{Dominance, NormSpec};
pub use scalar::{FunctionKind, ScalarFunction, Shape};

pub use num_complex::Complex64;
