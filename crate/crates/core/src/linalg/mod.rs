//! Dense complex linear algebra for small matrices: the Jacobi eigensolver,
//! functional calculus, singular values, congruences and Loewner-order tests.

mod jacobi;
mod matrix;
mod ops;
mod qr;

pub use jacobi::{assemble, eig_hermitian, Solver, Spectrum, DEFAULT_THRESHOLD, MAX_SWEEPS, TIGHT_THRESHOLD};
pub use matrix::{ComplexMatrix, HermitianMatrix, MatrixJson, MAX_DIM};
pub use ops::{
    abs_matrix, apply_scalar_function, congruence, domain_slack, is_contraction, is_expansive, is_psd, loewner_leq,
    op_norm, singular_values, snap_to_domain, zero_snap, LoewnerCheck,
};
pub use qr::{householder_qr, phase_normalized_q};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("dimension {0} outside 1..=64")]
    Dimension(usize),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("malformed matrix: {0}")]
    Shape(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("Jacobi did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("eigenvalue {eigenvalue:e} lies outside the domain of {function}")]
    Domain { eigenvalue: f64, function: String },
}
