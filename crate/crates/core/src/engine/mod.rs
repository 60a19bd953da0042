//! Every inequality as a named, checkable predicate over an [`Instance`].
//!
//! A check first evaluates the claim's hypotheses. Unless the caller forces
//! evaluation, an instance that fails them is reported as
//! [`Status::HypothesisFailed`] and never as holding. Margins are signed
//! (`≥ 0` means the inequality is satisfied) and are adjudicated against
//! [`Tolerances`]: a margin in the buffer zone, or beyond the counterexample
//! threshold, triggers a re-run with the tight eigensolver threshold before a
//! violation is reported.

mod certificate;
mod claims;
mod witness;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use certificate::{dominance_unitary, dominance_unitary_with, Certificate, UnitaryCertificate};
pub use claims::{
    check, check_contractive_sum, check_cor32, check_eq1, check_eq1_hermitian, check_eq2, check_eq2_reversed,
    check_eq3, check_eq3_reversed, check_eq4, check_eq4_nonpsd, check_eq5, check_eq6_weyl, check_eq9,
    check_loewner_subadd, check_thm11, check_thm21, check_thm22, check_thm31, check_uchiyama, congruence_sides,
};
pub use witness::{search_eq6_witness, WitnessPair};

use crate::linalg::{ComplexMatrix, HermitianMatrix, LinalgError};
use crate::norms::NormError;
use crate::scalar::{FunctionError, ScalarFunction};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error("malformed instance: {0}")]
    Instance(String),
    #[error("unknown claim {0:?}")]
    UnknownClaim(String),
    #[error("eigenvalue dominance fails at index {index}: λ(L) − λ(R) = {deficit:e}")]
    Dominance { index: usize, deficit: f64 },
    #[error("certificate failed re-verification: residual {residual:e}, unitarity defect {defect:e}")]
    Certificate { residual: f64, defect: f64 },
}

/// Claim identifiers. The last three are the negative claims: predicates
/// that are asserted only so that counterexamples to them can be found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClaimId {
    #[serde(rename = "thm31")]
    Thm31,
    #[serde(rename = "thm21")]
    Thm21,
    #[serde(rename = "thm22")]
    Thm22,
    #[serde(rename = "cor32")]
    Cor32,
    #[serde(rename = "thm11")]
    Thm11,
    #[serde(rename = "eq1")]
    Eq1,
    #[serde(rename = "eq1-hermitian")]
    Eq1Hermitian,
    #[serde(rename = "eq2")]
    Eq2,
    #[serde(rename = "eq3")]
    Eq3,
    #[serde(rename = "eq3-reversed")]
    Eq3Reversed,
    #[serde(rename = "eq4")]
    Eq4,
    #[serde(rename = "eq5")]
    Eq5,
    #[serde(rename = "eq6-weyl")]
    Eq6Weyl,
    #[serde(rename = "uchiyama")]
    Uchiyama,
    #[serde(rename = "contractive-sum")]
    ContractiveSum,
    #[serde(rename = "eq9")]
    Eq9,
    #[serde(rename = "eq4-nonpsd")]
    Eq4Nonpsd,
    #[serde(rename = "eq2-reversed")]
    Eq2Reversed,
    #[serde(rename = "loewner-subadd")]
    LoewnerSubadd,
}

impl ClaimId {
    pub const ALL: [ClaimId; 19] = [
        ClaimId::Thm31,
        ClaimId::Thm21,
        ClaimId::Thm22,
        ClaimId::Cor32,
        ClaimId::Thm11,
        ClaimId::Eq1,
        ClaimId::Eq1Hermitian,
        ClaimId::Eq2,
        ClaimId::Eq3,
        ClaimId::Eq3Reversed,
        ClaimId::Eq4,
        ClaimId::Eq5,
        ClaimId::Eq6Weyl,
        ClaimId::Uchiyama,
        ClaimId::ContractiveSum,
        ClaimId::Eq9,
        ClaimId::Eq4Nonpsd,
        ClaimId::Eq2Reversed,
        ClaimId::LoewnerSubadd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimId::Thm31 => "thm31",
            ClaimId::Thm21 => "thm21",
            ClaimId::Thm22 => "thm22",
            ClaimId::Cor32 => "cor32",
            ClaimId::Thm11 => "thm11",
            ClaimId::Eq1 => "eq1",
            ClaimId::Eq1Hermitian => "eq1-hermitian",
            ClaimId::Eq2 => "eq2",
            ClaimId::Eq3 => "eq3",
            ClaimId::Eq3Reversed => "eq3-reversed",
            ClaimId::Eq4 => "eq4",
            ClaimId::Eq5 => "eq5",
            ClaimId::Eq6Weyl => "eq6-weyl",
            ClaimId::Uchiyama => "uchiyama",
            ClaimId::ContractiveSum => "contractive-sum",
            ClaimId::Eq9 => "eq9",
            ClaimId::Eq4Nonpsd => "eq4-nonpsd",
            ClaimId::Eq2Reversed => "eq2-reversed",
            ClaimId::LoewnerSubadd => "loewner-subadd",
        }
    }

    /// True for the claims that are asserted to hold.
    pub fn is_true_claim(self) -> bool {
        !self.is_falsification_target()
    }

    pub fn is_falsification_target(self) -> bool {
        matches!(self, ClaimId::Eq4Nonpsd | ClaimId::Eq2Reversed | ClaimId::LoewnerSubadd)
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClaimId {
    type Err = EngineError;
    fn from_str(s: &str) -> Result<Self, EngineError> {
        ClaimId::ALL.iter().copied().find(|c| c.as_str() == s).ok_or_else(|| EngineError::UnknownClaim(s.to_string()))
    }
}

/// One `(Aᵢ, Zᵢ)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub a: HermitianMatrix,
    pub z: ComplexMatrix,
}

impl Term {
    pub fn new(a: HermitianMatrix, z: ComplexMatrix) -> Self {
        Self { a, z }
    }

    /// `(A, I)`.
    pub fn plain(a: HermitianMatrix) -> Self {
        let n = a.n();
        Self { a, z: ComplexMatrix::identity(n) }
    }
}

/// A function, a non-empty list of terms of common dimension, and the
/// claim-specific extras (`k` for the spectral-projection claim).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct Instance {
    pub claim: Option<ClaimId>,
    pub f: ScalarFunction,
    pub terms: Vec<Term>,
    pub k: Option<usize>,
}

impl Instance {
    pub fn new(f: ScalarFunction, terms: Vec<Term>) -> Self {
        Self { claim: None, f, terms, k: None }
    }

    pub fn with_claim(mut self, claim: ClaimId) -> Self {
        self.claim = Some(claim);
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn n(&self) -> usize {
        self.terms[0].a.n()
    }

    pub fn m(&self) -> usize {
        self.terms.len()
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let Some(first) = self.terms.first() else {
            return Err(EngineError::Instance("at least one term is required".into()));
        };
        let n = first.a.n();
        for (i, t) in self.terms.iter().enumerate() {
            if t.a.n() != n || !t.z.is_square() || t.z.n() != n {
                return Err(EngineError::Instance(format!("term {i} does not have dimension {n}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermJson {
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<HermitianMatrix>,
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    z: Option<ComplexMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    claim: Option<ClaimId>,
    f: ScalarFunction,
    terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
}

impl TryFrom<InstanceJson> for Instance {
    type Error = EngineError;
    fn try_from(j: InstanceJson) -> Result<Self, EngineError> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for (i, t) in j.terms.into_iter().enumerate() {
            let n = match (&t.a, &t.z) {
                (Some(a), _) => a.n(),
                (None, Some(z)) => z.n(),
                (None, None) => return Err(EngineError::Instance(format!("term {i} has neither A nor Z"))),
            };
            // A defaults to zero only where it is unused (the X, Y pairs of uchiyama)
            let a = match t.a {
                Some(a) => a,
                None if j.claim == Some(ClaimId::Uchiyama) => HermitianMatrix::zeros(n),
                None => return Err(EngineError::Instance(format!("term {i} is missing A"))),
            };
            let z = t.z.unwrap_or_else(|| ComplexMatrix::identity(n));
            terms.push(Term { a, z });
        }
        let inst = Instance { claim: j.claim, f: j.f, terms, k: j.k };
        inst.validate()?;
        Ok(inst)
    }
}

impl From<Instance> for InstanceJson {
    fn from(inst: Instance) -> Self {
        InstanceJson {
            claim: inst.claim,
            f: inst.f,
            terms: inst.terms.into_iter().map(|t| TermJson { a: Some(t.a), z: Some(t.z) }).collect(),
            k: inst.k,
        }
    }
}

/// Relative thresholds; each is multiplied by the claim's scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// A margin `≥ −holds · scale` satisfies the claim.
    pub holds: f64,
    /// Raw margins below `−counterexample · scale` are violation candidates.
    pub counterexample: f64,
    /// After the tight re-run a candidate must stay below `−confirm · scale`.
    pub confirm: f64,
    /// Tolerance of the hypothesis predicates (PSD, expansive, contraction).
    pub hypothesis: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { holds: 1e-8, counterexample: 1e-6, confirm: 1e-7, hypothesis: 1e-9 }
    }
}

impl Tolerances {
    /// Overrides the holding tolerance, keeping the other thresholds at
    /// least as loose.
    pub fn with_holds(holds: f64) -> Self {
        let d = Self::default();
        Self {
            holds,
            counterexample: d.counterexample.max(holds),
            confirm: d.confirm.max(holds),
            hypothesis: d.hypothesis,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckOptions {
    pub tolerances: Tolerances,
    /// Evaluate even when hypotheses fail.
    pub force: bool,
    /// Iteration budget for the unitary witness search attached to `eq6-weyl`
    /// verdicts; 0 disables the search.
    pub witness_budget: usize,
    pub witness_seed: u64,
}

impl CheckOptions {
    pub fn forced() -> Self {
        Self { force: true, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Violated,
    Inconclusive,
    HypothesisFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub claim: ClaimId,
    pub status: Status,
    pub holds: bool,
    /// Signed margin; `None` when hypotheses failed and evaluation was skipped.
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_k_margins: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding_k: Option<usize>,
    pub hypotheses_ok: bool,
    pub hypotheses: Vec<Hypothesis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    /// Absolute tolerance: `holds ⟺ margin ≥ −tolerance_used`.
    pub tolerance_used: f64,
    pub scale: f64,
    /// Whether the tight eigensolver re-run decided the verdict.
    pub tight_rerun: bool,
    /// Eigenvalue gap at the spectral-projection cut.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl Verdict {
    pub fn relative_margin(&self) -> Option<f64> {
        self.margin.map(|m| m / self.scale)
    }

    pub fn is_violation(&self) -> bool {
        self.status == Status::Violated
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claim_ids_round_trip() {
        for c in ClaimId::ALL {
            assert_eq!(c.as_str().parse::<ClaimId>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.as_str()));
        }
        assert!(matches!("thm99".parse::<ClaimId>(), Err(EngineError::UnknownClaim(_))));
    }

    #[test]
    fn instance_json_defaults() {
        let inst: Instance =
            serde_json::from_str(r#"{"claim":"thm21","f":{"kind":"sqrt"},"terms":[{"A":{"n":1,"re":[[4.0]]}}]}"#)
                .unwrap();
        assert_eq!(inst.claim, Some(ClaimId::Thm21));
        assert_eq!(inst.terms[0].z, ComplexMatrix::identity(1));
        let bad = serde_json::from_str::<Instance>(
            r#"{"f":{"kind":"sqrt"},"terms":[{"A":{"n":1,"re":[[4.0]]}},{"A":{"n":2,"re":[[1,0],[0,1]]}}]}"#,
        );
        assert!(bad.is_err());
        assert!(serde_json::from_str::<Instance>(r#"{"f":{"kind":"sqrt"},"terms":[]}"#).is_err());
        let u: Instance = serde_json::from_str(
            r#"{"claim":"uchiyama","f":{"kind":"sqrt"},"terms":[{"Z":{"n":1,"re":[[2.0]]}},{"Z":{"n":1,"re":[[3.0]]}}]}"#,
        )
        .unwrap();
        assert_eq!(u.terms[1].a, HermitianMatrix::zeros(1));
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = Instance::new(
            ScalarFunction::sqrt(),
            vec![Term::new(HermitianMatrix::from_diag(&[1.0, 0.1 + 0.2]), ComplexMatrix::from_diag(&[2.0, 1.0]))],
        )
        .with_claim(ClaimId::Thm21)
        .with_k(1);
        let s = serde_json::to_string(&inst).unwrap();
        let back: Instance = serde_json::from_str(&s).unwrap();
        assert_eq!(back, inst);
    }
}
