//! Campaigns: seeded batches of generated instances checked against one
//! claim, with one JSONL record per trial.
//!
//! Each trial is a pure function of `(Campaign, trial index)`: its
//! parameters come from the trial stream of the campaign seed, so records
//! are identical for any worker count and the report is ordered by trial.

mod approx;
mod falsify;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use approx::{approx_table, parse_grid, ApproxTable, Grid};
pub use falsify::{falsify, Discovery, FalsifyConfig, FalsifyOutcome};

use crate::engine::{check, CheckOptions, ClaimId, EngineError, Instance, Status, Term, Tolerances, Verdict};
use crate::generators::{shrink, Ensemble, GenError, GenSpec, Stream};
use crate::scalar::{catalog, ScalarFunction};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("trial {trial}: {source}")]
    Trial { trial: u64, source: EngineError },
    #[error("invalid campaign: {0}")]
    Invalid(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub claim: ClaimId,
    pub trials: u64,
    pub dim_min: usize,
    pub dim_max: usize,
    pub terms_min: usize,
    pub terms_max: usize,
    /// Function set; `None` selects the catalog family matching the claim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<Vec<ScalarFunction>>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub jobs: usize,
    /// Record wall time per trial. Off by default because it makes reports
    /// differ between runs.
    #[serde(default)]
    pub timing: bool,
}

impl Campaign {
    pub fn new(claim: ClaimId, trials: u64, seed: u64) -> Self {
        Self {
            claim,
            trials,
            dim_min: 1,
            dim_max: 8,
            terms_min: 1,
            terms_max: 4,
            functions: None,
            seed,
            tolerances: Tolerances::default(),
            jobs: 1,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.dim_min == 0 || self.dim_min > self.dim_max || self.dim_max > crate::linalg::MAX_DIM {
            return Err(HarnessError::Invalid(format!("dimension range {}..={}", self.dim_min, self.dim_max)));
        }
        if self.terms_min == 0 || self.terms_min > self.terms_max {
            return Err(HarnessError::Invalid(format!("term range {}..={}", self.terms_min, self.terms_max)));
        }
        if self.functions.as_ref().is_some_and(|f| f.is_empty()) {
            return Err(HarnessError::Invalid("empty function set".into()));
        }
        Ok(())
    }

    /// The configured functions, or the default family for the claim.
    pub fn function_set(&self) -> Vec<ScalarFunction> {
        self.functions.clone().unwrap_or_else(|| default_functions(self.claim))
    }
}

/// Catalog family matching the hypotheses of `claim`.
pub fn default_functions(claim: ClaimId) -> Vec<ScalarFunction> {
    match claim {
        ClaimId::Cor32 | ClaimId::Eq9 => catalog::convex(),
        ClaimId::Thm11 => [2.0, 2.5, 3.0].iter().map(|&p| ScalarFunction::power(p).unwrap()).collect(),
        ClaimId::Eq3 | ClaimId::Eq3Reversed => catalog::operator_concave(),
        ClaimId::LoewnerSubadd => vec![ScalarFunction::sqrt()],
        ClaimId::Eq1Hermitian => catalog::concave_on_reals(),
        ClaimId::Eq4Nonpsd => {
            vec![ScalarFunction::pwl(vec![[-1.0, -1.0], [0.0, 0.0], [1.0, 0.25]]).unwrap(), ScalarFunction::clamp(0.0)]
        }
        _ => catalog::concave(),
    }
}

fn psd_slot(rng: &mut Stream, n: usize) -> Ensemble {
    let u = rng.uniform();
    if u < 0.6 {
        Ensemble::Psd
    } else if u < 0.8 {
        Ensemble::PsdRankDeficient { rank: rng.int_in(1, n) }
    } else {
        let levels = [0.0, 0.5, 1.0, 2.0];
        let eigenvalues = (0..n).map(|_| *rng.pick(&levels)).collect();
        Ensemble::PsdDegenerateSpectrum { eigenvalues }
    }
}

fn expansive_slot(rng: &mut Stream) -> Ensemble {
    let u = rng.uniform();
    if u < 0.6 {
        Ensemble::Expansive
    } else if u < 0.85 {
        Ensemble::ExpansiveNearIdentity { eps: rng.uniform_in(0.0, 0.1) }
    } else {
        Ensemble::Unitary
    }
}

fn contraction_slot(rng: &mut Stream) -> Ensemble {
    if rng.uniform() < 0.8 {
        Ensemble::Contraction
    } else {
        Ensemble::Unitary
    }
}

fn arbitrary_slot(rng: &mut Stream) -> Ensemble {
    rng.pick(&[Ensemble::Expansive, Ensemble::Contraction, Ensemble::Unitary]).clone()
}

/// Everything a trial draws before generating matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub genspec: GenSpec,
    pub f: ScalarFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl TrialPlan {
    pub fn instance(&self, claim: ClaimId) -> Result<Instance, HarnessError> {
        let terms = self.genspec.generate()?.into_iter().map(|(a, z)| Term::new(a, z)).collect();
        Ok(Instance { claim: Some(claim), f: self.f.clone(), terms, k: self.k })
    }
}

/// Draws the dimension, term count, ensembles and function of a trial.
pub fn plan_trial(
    claim: ClaimId,
    functions: &[ScalarFunction],
    dims: (usize, usize),
    terms: (usize, usize),
    rng: &mut Stream,
) -> TrialPlan {
    let n = rng.int_in(dims.0, dims.1);
    let m = match claim {
        ClaimId::Thm21
        | ClaimId::Eq1
        | ClaimId::Eq1Hermitian
        | ClaimId::Eq2
        | ClaimId::Eq3
        | ClaimId::Eq3Reversed
        | ClaimId::Eq4
        | ClaimId::Eq4Nonpsd
        | ClaimId::Eq2Reversed => 1,
        ClaimId::Eq5 | ClaimId::Eq6Weyl | ClaimId::Uchiyama | ClaimId::LoewnerSubadd => 2,
        _ => rng.int_in(terms.0, terms.1),
    };
    let f = rng.pick(functions).clone();
    let mut a = Vec::with_capacity(m);
    let mut z = Vec::with_capacity(m);
    for _ in 0..m {
        let (ae, ze) = match claim {
            ClaimId::Thm31
            | ClaimId::Thm21
            | ClaimId::Cor32
            | ClaimId::Thm11
            | ClaimId::Eq9
            | ClaimId::Eq3Reversed
            | ClaimId::Eq4
            | ClaimId::Eq2Reversed => (psd_slot(rng, n), expansive_slot(rng)),
            ClaimId::Thm22 | ClaimId::Eq5 | ClaimId::Eq6Weyl | ClaimId::LoewnerSubadd => {
                (psd_slot(rng, n), Ensemble::Identity)
            }
            ClaimId::Eq1 | ClaimId::Eq2 | ClaimId::Eq3 => (psd_slot(rng, n), contraction_slot(rng)),
            ClaimId::Eq1Hermitian => (Ensemble::HermitianIndefinite, contraction_slot(rng)),
            ClaimId::Eq4Nonpsd => (Ensemble::HermitianIndefinite, expansive_slot(rng)),
            ClaimId::Uchiyama => (Ensemble::Identity, arbitrary_slot(rng)),
            ClaimId::ContractiveSum => (psd_slot(rng, n), Ensemble::ContractiveFamily),
        };
        a.push(ae);
        z.push(ze);
    }
    let k = (claim == ClaimId::Eq9).then(|| rng.int_in(1, n));
    TrialPlan { genspec: GenSpec { seed: rng.next_u64(), n, m, a, z }, f, k }
}

/// One JSONL line of a campaign report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub claim: ClaimId,
    pub n: usize,
    pub m: usize,
    pub f: ScalarFunction,
    pub genspec: GenSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub holds: bool,
    pub status: Status,
    pub margin: Option<f64>,
    pub binding_k: Option<usize>,
    pub hypotheses_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ms: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub trial: u64,
    pub instance: Instance,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub records: Vec<TrialRecord>,
    pub violations: Vec<Violation>,
}

impl CampaignReport {
    pub fn count(&self, status: Status) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }

    /// Smallest raw margin over the evaluated trials.
    pub fn min_margin(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.margin).min_by(f64::total_cmp)
    }

    pub fn to_jsonl(&self) -> String {
        to_jsonl(&self.records)
    }
}

pub fn to_jsonl(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Runs one trial. Returns the record and, for violations, the instance and
/// verdict.
pub fn run_trial(campaign: &Campaign, trial: u64) -> Result<(TrialRecord, Option<Violation>), HarnessError> {
    let start = Instant::now();
    let mut rng = Stream::for_trial(campaign.seed, trial);
    let plan = plan_trial(
        campaign.claim,
        &campaign.function_set(),
        (campaign.dim_min, campaign.dim_max),
        (campaign.terms_min, campaign.terms_max),
        &mut rng,
    );
    let inst = plan.instance(campaign.claim)?;
    let opts = CheckOptions { tolerances: campaign.tolerances, ..CheckOptions::default() };
    let verdict = check(&inst, campaign.claim, &opts).map_err(|source| HarnessError::Trial { trial, source })?;
    let record = TrialRecord {
        trial,
        claim: campaign.claim,
        n: plan.genspec.n,
        m: plan.genspec.m,
        f: plan.f,
        genspec: plan.genspec,
        k: plan.k,
        holds: verdict.holds,
        status: verdict.status,
        margin: verdict.margin,
        binding_k: verdict.binding_k,
        hypotheses_ok: verdict.hypotheses_ok,
        ms: campaign.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    let violation = (verdict.status == Status::Violated).then_some(Violation { trial, instance: inst, verdict });
    Ok((record, violation))
}

pub(crate) fn pool(jobs: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| HarnessError::Pool(e.to_string()))
}

/// Runs every trial on a pool of `campaign.jobs` workers; records come back
/// in trial order.
pub fn run_campaign(campaign: &Campaign) -> Result<CampaignReport, HarnessError> {
    campaign.validate()?;
    let results: Vec<_> =
        pool(campaign.jobs)?.install(|| (0..campaign.trials).into_par_iter().map(|t| run_trial(campaign, t)).collect());
    let mut records = Vec::with_capacity(results.len());
    let mut violations = Vec::new();
    for r in results {
        let (rec, v) = r?;
        records.push(rec);
        violations.extend(v);
    }
    Ok(CampaignReport { records, violations })
}

/// Shrinks a violating instance while `claim` keeps reporting a confirmed
/// violation.
pub fn shrink_violation(inst: &Instance, claim: ClaimId, opts: &CheckOptions) -> Instance {
    shrink(inst, |c| check(c, claim, opts).map(|v| v.status == Status::Violated).unwrap_or(false))
}

/// Witness file contents: the instance fields with the verdict alongside,
/// so the file itself is a valid instance.
pub fn witness_json(inst: &Instance, verdict: &Verdict) -> serde_json::Value {
    let mut v = serde_json::to_value(inst).expect("instances serialize");
    v["verdict"] = serde_json::to_value(verdict).expect("verdicts serialize");
    v
}
