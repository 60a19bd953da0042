use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{default_functions, plan_trial, pool, shrink_violation, HarnessError};
use crate::engine::{check, CheckOptions, ClaimId, Instance, Status, Tolerances, Verdict};
use crate::generators::Stream;
use crate::scalar::ScalarFunction;

/// Trials are evaluated in blocks of this size; the first violation by
/// trial index wins, whatever the worker count.
const BLOCK: u64 = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsifyConfig {
    pub target: ClaimId,
    pub budget: u64,
    pub seed: u64,
    pub dim_min: usize,
    pub dim_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<Vec<ScalarFunction>>,
    pub jobs: usize,
}

impl FalsifyConfig {
    /// Dimension 2 for the subadditivity target, 2..=3 otherwise; scalar
    /// instances cannot violate any of the targets.
    pub fn new(target: ClaimId, budget: u64, seed: u64) -> Self {
        let dim_max = if target == ClaimId::LoewnerSubadd { 2 } else { 3 };
        Self { target, budget, seed, dim_min: 2, dim_max, functions: None, jobs: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Discovery {
    /// Index of the first violating trial.
    pub trial: u64,
    pub original_n: usize,
    /// Shrunk instance.
    pub instance: Instance,
    /// Verdict on the shrunk instance with default tolerances.
    pub verdict: Verdict,
    /// Verdict on the shrunk instance at holding tolerance `1e-7`.
    pub replay: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FalsifyOutcome {
    pub target: ClaimId,
    pub trials_run: u64,
    pub budget: u64,
    pub discovery: Option<Discovery>,
}

/// Searches for a confirmed violation of a negative claim, then shrinks it
/// and re-checks the shrunk instance at tolerance `1e-7`. A discovery is
/// reported only if that replay is still a violation.
pub fn falsify(cfg: &FalsifyConfig) -> Result<FalsifyOutcome, HarnessError> {
    if !cfg.target.is_falsification_target() {
        return Err(HarnessError::Invalid(format!("{} is not a falsification target", cfg.target)));
    }
    if cfg.dim_min == 0 || cfg.dim_min > cfg.dim_max || cfg.dim_max > crate::linalg::MAX_DIM {
        return Err(HarnessError::Invalid(format!("dimension range {}..={}", cfg.dim_min, cfg.dim_max)));
    }
    let functions = cfg.functions.clone().unwrap_or_else(|| default_functions(cfg.target));
    if functions.is_empty() {
        return Err(HarnessError::Invalid("empty function set".into()));
    }
    let opts = CheckOptions::default();
    let workers = pool(cfg.jobs)?;
    let try_trial = |trial: u64| -> Result<Option<Instance>, HarnessError> {
        let mut rng = Stream::for_trial(cfg.seed, trial);
        let plan = plan_trial(cfg.target, &functions, (cfg.dim_min, cfg.dim_max), (1, 1), &mut rng);
        let inst = plan.instance(cfg.target)?;
        let v = check(&inst, cfg.target, &opts).map_err(|source| HarnessError::Trial { trial, source })?;
        Ok((v.status == Status::Violated).then_some(inst))
    };

    let mut start = 0;
    while start < cfg.budget {
        let end = (start + BLOCK).min(cfg.budget);
        let found: Vec<Result<Option<Instance>, HarnessError>> =
            workers.install(|| (start..end).into_par_iter().map(try_trial).collect());
        for (offset, r) in found.into_iter().enumerate() {
            let Some(inst) = r? else { continue };
            let trial = start + offset as u64;
            let shrunk = shrink_violation(&inst, cfg.target, &opts);
            let verdict = check(&shrunk, cfg.target, &opts)?;
            let replay_opts = CheckOptions { tolerances: Tolerances::with_holds(1e-7), ..CheckOptions::default() };
            let replay = check(&shrunk, cfg.target, &replay_opts)?;
            if replay.status != Status::Violated {
                continue;
            }
            let discovery = Discovery { trial, original_n: inst.n(), instance: shrunk, verdict, replay };
            return Ok(FalsifyOutcome {
                target: cfg.target,
                trials_run: trial + 1,
                budget: cfg.budget,
                discovery: Some(discovery),
            });
        }
        start = end;
    }
    Ok(FalsifyOutcome { target: cfg.target, trials_run: cfg.budget, budget: cfg.budget, discovery: None })
}
