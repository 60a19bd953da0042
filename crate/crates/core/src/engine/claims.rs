use super::certificate::dominance_unitary_with;
use super::witness::search_eq6_witness;
use super::{Certificate, CheckOptions, ClaimId, EngineError, Hypothesis, Instance, Status, Term, Verdict};
use crate::linalg::{congruence, ComplexMatrix, HermitianMatrix, Solver};
use crate::scalar::{Domain, FunctionKind, ScalarFunction};

/// What one evaluation pass produces; the adjudicator may run it twice.
struct Evaluation {
    margin: f64,
    scale: f64,
    per_k: Option<Vec<f64>>,
    certificate: Option<Certificate>,
    cut_gap: Option<f64>,
}

impl Evaluation {
    fn scalar(margin: f64, scale: f64) -> Self {
        Self { margin, scale, per_k: None, certificate: None, cut_gap: None }
    }

    fn per_k(margins: Vec<f64>, scale: f64) -> Self {
        let margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
        Self { margin, scale, per_k: Some(margins), certificate: None, cut_gap: None }
    }
}

struct Hypotheses {
    solver: Solver,
    tol: f64,
    list: Vec<Hypothesis>,
}

impl Hypotheses {
    fn new(opts: &CheckOptions) -> Self {
        Self { solver: Solver::default(), tol: opts.tolerances.hypothesis, list: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.list.push(Hypothesis { name: name.into(), ok, detail: detail.into() });
    }

    fn psd(&mut self, terms: &[Term]) -> Result<(), EngineError> {
        for (i, t) in terms.iter().enumerate() {
            let lmin = *self.solver.eigenvalues(&t.a)?.last().unwrap();
            let ok = self.solver.is_psd(&t.a, self.tol)?;
            self.push(format!("A{} psd", i + 1), ok, format!("λ_min = {lmin:e}"));
        }
        Ok(())
    }

    fn expansive(&mut self, terms: &[Term]) -> Result<(), EngineError> {
        for (i, t) in terms.iter().enumerate() {
            let s = self.solver.singular_values(&t.z)?;
            let smin = s[s.len() - 1];
            self.push(format!("Z{} expansive", i + 1), smin >= 1.0 - self.tol, format!("σ_min = {smin}"));
        }
        Ok(())
    }

    fn contraction(&mut self, terms: &[Term]) -> Result<(), EngineError> {
        for (i, t) in terms.iter().enumerate() {
            let smax = self.solver.op_norm(&t.z)?;
            self.push(format!("Z{} contraction", i + 1), smax <= 1.0 + self.tol, format!("σ_max = {smax}"));
        }
        Ok(())
    }

    fn contractive_family(&mut self, terms: &[Term]) -> Result<(), EngineError> {
        let n = terms[0].a.n();
        let gram = HermitianMatrix::sum(
            n,
            &terms.iter().map(|t| HermitianMatrix::from_matrix(&(&t.z.adjoint() * &t.z))).collect::<Vec<_>>(),
        );
        let lmax = self.solver.eigenvalues(&gram)?[0];
        self.push("Σ Zᵢ*Zᵢ ⪯ I", lmax <= 1.0 + self.tol, format!("λ_max = {lmax}"));
        Ok(())
    }

    fn nonneg_concave(&mut self, f: &ScalarFunction) {
        let ok = f.is_nonneg_concave();
        self.push("f concave, non-negative, f(0) ≥ 0", ok, f.to_string());
    }

    fn concave_on_reals(&mut self, f: &ScalarFunction) {
        let ok = f.shape().is_concave() && f.domain() == Domain::Real && f.value_at_zero() >= 0.0;
        self.push("f concave on ℝ, f(0) ≥ 0", ok, f.to_string());
    }

    fn concave_on_reals_vanishing(&mut self, f: &ScalarFunction) {
        let ok = f.shape().is_concave() && f.domain() == Domain::Real && f.value_at_zero() == 0.0;
        self.push("f concave on ℝ, f(0) = 0", ok, f.to_string());
    }

    fn nonneg_convex(&mut self, g: &ScalarFunction) {
        let ok = g.is_nonneg_convex_vanishing();
        self.push("g convex, non-negative, g(0) = 0", ok, g.to_string());
    }

    fn operator_concave(&mut self, f: &ScalarFunction) {
        let ok = f.is_operator_concave() && f.value_at_zero() >= 0.0;
        self.push("f operator concave, f(0) ≥ 0", ok, f.to_string());
    }

    fn ok(&self) -> bool {
        self.list.iter().all(|h| h.ok)
    }
}

fn require_terms(inst: &Instance, m: usize, claim: ClaimId) -> Result<(), EngineError> {
    inst.validate()?;
    if inst.m() != m {
        return Err(EngineError::Instance(format!("{claim} takes {m} term(s), got {}", inst.m())));
    }
    Ok(())
}

fn trace_norm(solver: &Solver, h: &HermitianMatrix) -> Result<f64, EngineError> {
    Ok(solver.eigenvalues(h)?.iter().map(|v| v.abs()).sum())
}

fn scale_of(solver: &Solver, sides: &[&HermitianMatrix]) -> Result<f64, EngineError> {
    sides.iter().try_fold(1.0_f64, |m, h| Ok(m.max(trace_norm(solver, h)?)))
}

/// `Σ Zᵢ* Aᵢ Zᵢ`.
fn congruence_sum(terms: &[Term]) -> Result<HermitianMatrix, EngineError> {
    let parts = terms.iter().map(|t| congruence(&t.z, &t.a)).collect::<Result<Vec<_>, _>>()?;
    Ok(HermitianMatrix::sum(terms[0].a.n(), &parts))
}

/// `Σ Zᵢ* f(Aᵢ) Zᵢ`.
fn transformed_sum(solver: &Solver, terms: &[Term], f: &ScalarFunction) -> Result<HermitianMatrix, EngineError> {
    let parts = terms
        .iter()
        .map(|t| Ok(congruence(&t.z, &solver.apply(&t.a, f)?)?))
        .collect::<Result<Vec<_>, EngineError>>()?;
    Ok(HermitianMatrix::sum(terms[0].a.n(), &parts))
}

/// `(f(Σ Zᵢ*AᵢZᵢ), Σ Zᵢ*f(Aᵢ)Zᵢ)`, the two sides of every congruence claim.
pub fn congruence_sides(solver: &Solver, inst: &Instance) -> Result<(HermitianMatrix, HermitianMatrix), EngineError> {
    inst.validate()?;
    let l = solver.apply(&congruence_sum(&inst.terms)?, &inst.f)?;
    let r = transformed_sum(solver, &inst.terms, &inst.f)?;
    Ok((l, r))
}

/// Per-k margins `‖Y‖_k − ‖X‖_k`.
fn ky_fan_margins(solver: &Solver, x: &HermitianMatrix, y: &HermitianMatrix) -> Result<Evaluation, EngineError> {
    let dom =
        crate::norms::dominance_from_singular_values(&solver.singular_values(x)?, &solver.singular_values(y)?, 0.0)?;
    Ok(Evaluation::per_k(dom.margins, scale_of(solver, &[x, y])?))
}

/// Entrywise margins `λⱼ(big) − λⱼ(small)`.
fn entrywise_margins(
    solver: &Solver,
    small: &HermitianMatrix,
    big: &HermitianMatrix,
) -> Result<Evaluation, EngineError> {
    let lb = solver.eigenvalues(big)?;
    let ls = solver.eigenvalues(small)?;
    let margins = lb.iter().zip(&ls).map(|(b, s)| b - s).collect();
    Ok(Evaluation::per_k(margins, scale_of(solver, &[small, big])?))
}

fn trace_margin(solver: &Solver, small: &HermitianMatrix, big: &HermitianMatrix) -> Result<Evaluation, EngineError> {
    Ok(Evaluation::scalar(big.trace() - small.trace(), scale_of(solver, &[small, big])?))
}

/// `λ_min(big − small)`.
fn loewner_margin(solver: &Solver, small: &HermitianMatrix, big: &HermitianMatrix) -> Result<Evaluation, EngineError> {
    let margin = *solver.eigenvalues(&big.sub(small))?.last().unwrap();
    Ok(Evaluation::scalar(margin, scale_of(solver, &[small, big])?))
}

fn skipped(claim: ClaimId, hyps: Hypotheses) -> Verdict {
    Verdict {
        claim,
        status: Status::HypothesisFailed,
        holds: false,
        margin: None,
        per_k_margins: None,
        binding_k: None,
        hypotheses_ok: false,
        hypotheses: hyps.list,
        certificate: None,
        tolerance_used: 0.0,
        scale: 1.0,
        tight_rerun: false,
        cut_gap: None,
        warning: Some("hypotheses failed; not evaluated".into()),
    }
}

/// Gates on hypotheses, evaluates, and re-runs with the tight solver when
/// the first margin is not clearly non-negative.
fn adjudicate(
    claim: ClaimId,
    hyps: Hypotheses,
    opts: &CheckOptions,
    eval: impl Fn(&Solver) -> Result<Evaluation, EngineError>,
) -> Result<Verdict, EngineError> {
    let hypotheses_ok = hyps.ok();
    if !hypotheses_ok && !opts.force {
        return Ok(skipped(claim, hyps));
    }
    let tol = opts.tolerances;
    let first = eval(&Solver::default())?;
    let (status, e, tight_rerun) = if first.margin >= -tol.holds * first.scale {
        (Status::Holds, first, false)
    } else {
        let second = eval(&Solver::tight())?;
        let status = if second.margin >= -tol.holds * second.scale {
            Status::Holds
        } else if first.margin < -tol.counterexample * first.scale && second.margin < -tol.confirm * second.scale {
            Status::Violated
        } else {
            Status::Inconclusive
        };
        (status, second, true)
    };
    let tolerance_used = tol.holds * e.scale;
    let binding_k = e
        .per_k
        .as_ref()
        .map(|v| v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i + 1).unwrap_or(1));
    let mut warning = match status {
        Status::Inconclusive => Some(format!(
            "margin {:e} lies between the holding and counterexample thresholds after the tight re-run",
            e.margin
        )),
        _ => None,
    };
    if !hypotheses_ok {
        warning = Some(match warning {
            Some(w) => format!("hypotheses failed; evaluated because forced; {w}"),
            None => "hypotheses failed; evaluated because forced".into(),
        });
    }
    Ok(Verdict {
        claim,
        status,
        holds: status == Status::Holds,
        margin: Some(e.margin),
        per_k_margins: e.per_k,
        binding_k,
        hypotheses_ok,
        hypotheses: hyps.list,
        certificate: e.certificate,
        tolerance_used,
        scale: e.scale,
        tight_rerun,
        cut_gap: e.cut_gap,
        warning,
    })
}

/// `f(Σ Zᵢ*AᵢZᵢ)` is dominated by `Σ Zᵢ*f(Aᵢ)Zᵢ` in every Ky Fan norm, for
/// PSD `Aᵢ`, expansive `Zᵢ` and non-negative concave `f`.
pub fn check_thm31(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    thm31_as(ClaimId::Thm31, inst, opts)
}

fn thm31_as(claim: ClaimId, inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    inst.validate()?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.expansive(&inst.terms)?;
    h.nonneg_concave(&inst.f);
    adjudicate(claim, h, opts, |s| {
        let l = s.apply(&congruence_sum(&inst.terms)?, &inst.f)?;
        let r = transformed_sum(s, &inst.terms, &inst.f)?;
        ky_fan_margins(s, &l, &r)
    })
}

/// The single-congruence case of [`check_thm31`].
pub fn check_thm21(
    a: &HermitianMatrix,
    z: &ComplexMatrix,
    f: &ScalarFunction,
    opts: &CheckOptions,
) -> Result<Verdict, EngineError> {
    let inst = Instance::new(f.clone(), vec![Term::new(a.clone(), z.clone())]);
    thm31_as(ClaimId::Thm21, &inst, opts)
}

/// The sum case of [`check_thm31`]: every `Zᵢ = I`.
pub fn check_thm22(a: &[HermitianMatrix], f: &ScalarFunction, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    if a.is_empty() {
        return Err(EngineError::Instance("at least one term is required".into()));
    }
    let inst = Instance::new(f.clone(), a.iter().cloned().map(Term::plain).collect());
    thm31_as(ClaimId::Thm22, &inst, opts)
}

/// `Σ Zᵢ*g(Aᵢ)Zᵢ` is dominated by `g(Σ Zᵢ*AᵢZᵢ)` in every Ky Fan norm, for
/// convex non-negative `g` with `g(0) = 0`.
pub fn check_cor32(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    cor32_as(ClaimId::Cor32, inst, opts)
}

fn cor32_as(claim: ClaimId, inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    inst.validate()?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.expansive(&inst.terms)?;
    h.nonneg_convex(&inst.f);
    adjudicate(claim, h, opts, |s| {
        let l = transformed_sum(s, &inst.terms, &inst.f)?;
        let r = s.apply(&congruence_sum(&inst.terms)?, &inst.f)?;
        ky_fan_margins(s, &l, &r)
    })
}

/// [`check_cor32`] with `g(t) = t^p`, `p > 1`.
pub fn check_thm11(inst: &Instance, p: f64, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    if !(p > 1.0) {
        return Err(EngineError::Instance(format!("exponent must exceed 1, got {p}")));
    }
    let inst = Instance { f: ScalarFunction::power(p)?, ..inst.clone() };
    cor32_as(ClaimId::Thm11, &inst, opts)
}

/// `Tr f(Z*AZ) ≥ Tr Z*f(A)Z` for a contraction `Z`.
pub fn check_eq1(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 1, ClaimId::Eq1)?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.contraction(&inst.terms)?;
    h.nonneg_concave(&inst.f);
    adjudicate(ClaimId::Eq1, h, opts, |s| {
        let big = s.apply(&congruence_sum(&inst.terms)?, &inst.f)?;
        let small = transformed_sum(s, &inst.terms, &inst.f)?;
        trace_margin(s, &small, &big)
    })
}

/// The trace inequality of [`check_eq1`] for Hermitian `A` and `f` concave
/// on ℝ with `f(0) ≥ 0`.
pub fn check_eq1_hermitian(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 1, ClaimId::Eq1Hermitian)?;
    let mut h = Hypotheses::new(opts);
    h.contraction(&inst.terms)?;
    h.concave_on_reals(&inst.f);
    adjudicate(ClaimId::Eq1Hermitian, h, opts, |s| {
        let big = s.apply(&congruence_sum(&inst.terms)?, &inst.f)?;
        let small = transformed_sum(s, &inst.terms, &inst.f)?;
        trace_margin(s, &small, &big)
    })
}

/// `λⱼ(f(Z*AZ)) ≥ λⱼ(Z*f(A)Z)` for every `j`, with the aligning unitary as
/// certificate.
pub fn check_eq2(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 1, ClaimId::Eq2)?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.contraction(&inst.terms)?;
    h.nonneg_concave(&inst.f);
    certified_dominance(ClaimId::Eq2, inst, h, opts)
}

/// Entrywise dominance for a family with `Σ Zᵢ*Zᵢ ⪯ I`.
pub fn check_contractive_sum(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    inst.validate()?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.contractive_family(&inst.terms)?;
    h.nonneg_concave(&inst.f);
    certified_dominance(ClaimId::ContractiveSum, inst, h, opts)
}

fn certified_dominance(
    claim: ClaimId,
    inst: &Instance,
    h: Hypotheses,
    opts: &CheckOptions,
) -> Result<Verdict, EngineError> {
    let tol = opts.tolerances.holds;
    adjudicate(claim, h, opts, |s| {
        let l = s.apply(&congruence_sum(&inst.terms)?, &inst.f)?;
        let r = transformed_sum(s, &inst.terms, &inst.f)?;
        let mut e = entrywise_margins(s, &r, &l)?;
        if e.margin >= -tol * e.scale {
            let cert = dominance_unitary_with(s, &l, &r, tol * e.scale, 1e-8)?;
            e.certificate = Some(Certificate::Unitary(cert));
        }
        Ok(e)
    })
}

/// Negative claim: the reversal of [`check_eq2`] for expansive `Z`,
/// `λⱼ(Z*f(A)Z) ≥ λⱼ(f(Z*AZ))` for every `j`.
pub fn check_eq2_reversed(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 1, ClaimId::Eq2Reversed)?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.expansive(&inst.terms)?;
    h.nonneg_concave(&inst.f);
    adjudicate(ClaimId::Eq2Reversed, h, opts, |s| {
        let small = s.apply(&congruence_sum(&inst.terms)?, &inst.f)?;
        let big = transformed_sum(s, &inst.terms, &inst.f)?;
        entrywise_margins(s, &small, &big)
    })
}

/// `f(Z*AZ) ⪰ Z*f(A)Z` for a contraction `Z` and operator concave `f`.
pub fn check_eq3(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 1, ClaimId::Eq3)?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.contraction(&inst.terms)?;
    h.operator_concave(&inst.f);
    adjudicate(ClaimId::Eq3, h, opts, |s| {
        let big = s.apply(&congruence_sum(&inst.terms)?, &inst.f)?;
        let small = transformed_sum(s, &inst.terms, &inst.f)?;
        loewner_margin(s, &small, &big)
    })
}

/// `f(Z*AZ) ⪯ Z*f(A)Z` for an expansive `Z` and operator concave `f`.
pub fn check_eq3_reversed(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 1, ClaimId::Eq3Reversed)?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.expansive(&inst.terms)?;
    h.operator_concave(&inst.f);
    adjudicate(ClaimId::Eq3Reversed, h, opts, |s| {
        let small = s.apply(&congruence_sum(&inst.terms)?, &inst.f)?;
        let big = transformed_sum(s, &inst.terms, &inst.f)?;
        loewner_margin(s, &small, &big)
    })
}

/// `Tr f(Z*AZ) ≤ Tr Z*f(A)Z` for PSD `A` and expansive `Z`.
pub fn check_eq4(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 1, ClaimId::Eq4)?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.expansive(&inst.terms)?;
    h.nonneg_concave(&inst.f);
    eq4_margin(ClaimId::Eq4, inst, h, opts)
}

/// Negative claim: [`check_eq4`] for Hermitian `A` and `f` concave on ℝ
/// with `f(0) = 0`.
pub fn check_eq4_nonpsd(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 1, ClaimId::Eq4Nonpsd)?;
    let mut h = Hypotheses::new(opts);
    h.expansive(&inst.terms)?;
    h.concave_on_reals_vanishing(&inst.f);
    eq4_margin(ClaimId::Eq4Nonpsd, inst, h, opts)
}

fn eq4_margin(claim: ClaimId, inst: &Instance, h: Hypotheses, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    adjudicate(claim, h, opts, |s| {
        let small = s.apply(&congruence_sum(&inst.terms)?, &inst.f)?;
        let big = transformed_sum(s, &inst.terms, &inst.f)?;
        trace_margin(s, &small, &big)
    })
}

fn pair(inst: &Instance) -> (&HermitianMatrix, &HermitianMatrix) {
    (&inst.terms[0].a, &inst.terms[1].a)
}

/// `Tr f(A+B) ≤ Tr f(A) + Tr f(B)`. The `Zᵢ` are ignored.
pub fn check_eq5(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 2, ClaimId::Eq5)?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.nonneg_concave(&inst.f);
    adjudicate(ClaimId::Eq5, h, opts, |s| {
        let (a, b) = pair(inst);
        let small = s.apply(&a.add(b), &inst.f)?;
        let big = s.apply(a, &inst.f)?.add(&s.apply(b, &inst.f)?);
        trace_margin(s, &small, &big)
    })
}

/// Negative claim: `f(A+B) ⪯ f(A) + f(B)`. The `Zᵢ` are ignored.
pub fn check_loewner_subadd(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 2, ClaimId::LoewnerSubadd)?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.operator_concave(&inst.f);
    adjudicate(ClaimId::LoewnerSubadd, h, opts, |s| {
        let (a, b) = pair(inst);
        let small = s.apply(&a.add(b), &inst.f)?;
        let big = s.apply(a, &inst.f)?.add(&s.apply(b, &inst.f)?);
        loewner_margin(s, &small, &big)
    })
}

/// The eigenvalue conditions `λ_{i+j−1}(f(A+B)) ≤ λᵢ(f(A)) + λⱼ(f(B))`
/// implied by unitary subadditivity. Entry `l − 1` of the per-k margins is
/// the smallest slack over `i + j − 1 = l`. With a positive witness budget a
/// unitary pair is searched for and attached when found; a failed search is
/// only a warning.
pub fn check_eq6_weyl(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 2, ClaimId::Eq6Weyl)?;
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.nonneg_concave(&inst.f);
    let mut v = adjudicate(ClaimId::Eq6Weyl, h, opts, |s| {
        let (a, b) = pair(inst);
        let fs = s.apply(&a.add(b), &inst.f)?;
        let fa = s.apply(a, &inst.f)?;
        let fb = s.apply(b, &inst.f)?;
        let (ls, la, lb) = (s.eigenvalues(&fs)?, s.eigenvalues(&fa)?, s.eigenvalues(&fb)?);
        let n = ls.len();
        let mut margins = vec![f64::INFINITY; n];
        for i in 0..n {
            for j in 0..n - i {
                let l = i + j;
                margins[l] = margins[l].min(la[i] + lb[j] - ls[l]);
            }
        }
        Ok(Evaluation::per_k(margins, scale_of(s, &[&fs, &fa.add(&fb)])?))
    })?;
    if opts.witness_budget > 0 && v.status != Status::HypothesisFailed {
        let (a, b) = pair(inst);
        match search_eq6_witness(a, b, &inst.f, opts.witness_budget, opts.witness_seed)? {
            Some(w) => v.certificate = Some(Certificate::UnitaryPair { u: w.u, v: w.v, margin: w.margin }),
            None => {
                let note = format!("no unitary witness found within budget {}", opts.witness_budget);
                v.warning = Some(match v.warning.take() {
                    Some(w) => format!("{w}; {note}"),
                    None => note,
                });
            }
        }
    }
    Ok(v)
}

/// `‖f(|X+Y|)‖_k ≤ ‖f(|X|)‖_k + ‖f(|Y|)‖_k` for every `k`, with `X` and `Y`
/// taken from the `Z` fields of the two terms.
pub fn check_uchiyama(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    require_terms(inst, 2, ClaimId::Uchiyama)?;
    let mut h = Hypotheses::new(opts);
    h.nonneg_concave(&inst.f);
    adjudicate(ClaimId::Uchiyama, h, opts, |s| {
        let (x, y) = (&inst.terms[0].z, &inst.terms[1].z);
        let fx = s.apply(&s.abs(x)?, &inst.f)?;
        let fy = s.apply(&s.abs(y)?, &inst.f)?;
        let fxy = s.apply(&s.abs(&(x + y))?, &inst.f)?;
        let kf = |h: &HermitianMatrix| -> Result<Vec<f64>, EngineError> {
            Ok(crate::norms::ky_fan_norms(&s.singular_values(h)?))
        };
        let (kx, ky, kxy) = (kf(&fx)?, kf(&fy)?, kf(&fxy)?);
        let margins = (0..kx.len()).map(|i| kx[i] + ky[i] - kxy[i]).collect();
        let scale = 1.0_f64.max(kx[kx.len() - 1] + ky[ky.len() - 1]).max(kxy[kxy.len() - 1]);
        Ok(Evaluation::per_k(margins, scale))
    })
}

/// With `E` the projection onto the top-`k` eigenvectors of `S = Σ Zᵢ*AᵢZᵢ`:
/// `Tr E(Σ Zᵢ*h(Aᵢ)Zᵢ)E ≤ Tr E h(S) E` for convex `h` with `h(0) = 0` and
/// expansive `Zᵢ`. `k` defaults to `n`.
pub fn check_eq9(inst: &Instance, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    inst.validate()?;
    let n = inst.n();
    let k = inst.k.unwrap_or(n);
    if k == 0 || k > n {
        return Err(EngineError::Instance(format!("projection rank {k} outside 1..={n}")));
    }
    let mut h = Hypotheses::new(opts);
    h.psd(&inst.terms)?;
    h.expansive(&inst.terms)?;
    h.nonneg_convex(&inst.f);
    adjudicate(ClaimId::Eq9, h, opts, |s| {
        let sum = congruence_sum(&inst.terms)?;
        let spec = s.eig(&sum)?;
        let hs = crate::linalg::assemble(&spec.vectors, &inst.f_values(&spec.values)?);
        let rhs = transformed_sum(s, &inst.terms, &inst.f)?;
        let e = ComplexMatrix::from_fn(n, k, |i, j| spec.vectors[(i, j)]);
        let compress = |m: &HermitianMatrix| (&(&e.adjoint() * m.as_matrix()) * &e).trace().re;
        let big = compress(&hs);
        let small = compress(&rhs);
        let scale = 1.0_f64.max(big.abs()).max(small.abs());
        let proj = HermitianMatrix::from_matrix(&(&e * &e.adjoint()));
        let mut ev = Evaluation::scalar(big - small, scale);
        ev.cut_gap = (k < n).then(|| spec.values[k - 1] - spec.values[k]);
        ev.certificate = Some(Certificate::Projection { e: proj, rank: k });
        Ok(ev)
    })
}

impl Instance {
    /// `f` at the given eigenvalues, snapped as in [`Solver::apply`].
    fn f_values(&self, values: &[f64]) -> Result<Vec<f64>, EngineError> {
        let norm = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        values
            .iter()
            .map(|&l| {
                let t = crate::linalg::snap_to_domain(l, norm, self.f.domain()).unwrap_or(l);
                Ok(self.f.eval(t)?)
            })
            .collect()
    }
}

/// Dispatches on `claim`. For `thm11` the instance function must be a
/// power `t^p`; `thm21` needs a single term; `thm22` ignores the `Zᵢ`.
pub fn check(inst: &Instance, claim: ClaimId, opts: &CheckOptions) -> Result<Verdict, EngineError> {
    inst.validate()?;
    match claim {
        ClaimId::Thm31 => check_thm31(inst, opts),
        ClaimId::Thm21 => {
            require_terms(inst, 1, claim)?;
            check_thm21(&inst.terms[0].a, &inst.terms[0].z, &inst.f, opts)
        }
        ClaimId::Thm22 => {
            let a: Vec<HermitianMatrix> = inst.terms.iter().map(|t| t.a.clone()).collect();
            check_thm22(&a, &inst.f, opts)
        }
        ClaimId::Cor32 => check_cor32(inst, opts),
        ClaimId::Thm11 => match inst.f.kind() {
            FunctionKind::Power { p } => check_thm11(inst, *p, opts),
            _ => Err(EngineError::Instance(format!("thm11 needs a power function, got {}", inst.f))),
        },
        ClaimId::Eq1 => check_eq1(inst, opts),
        ClaimId::Eq1Hermitian => check_eq1_hermitian(inst, opts),
        ClaimId::Eq2 => check_eq2(inst, opts),
        ClaimId::Eq3 => check_eq3(inst, opts),
        ClaimId::Eq3Reversed => check_eq3_reversed(inst, opts),
        ClaimId::Eq4 => check_eq4(inst, opts),
        ClaimId::Eq5 => check_eq5(inst, opts),
        ClaimId::Eq6Weyl => check_eq6_weyl(inst, opts),
        ClaimId::Uchiyama => check_uchiyama(inst, opts),
        ClaimId::ContractiveSum => check_contractive_sum(inst, opts),
        ClaimId::Eq9 => check_eq9(inst, opts),
        ClaimId::Eq4Nonpsd => check_eq4_nonpsd(inst, opts),
        ClaimId::Eq2Reversed => check_eq2_reversed(inst, opts),
        ClaimId::LoewnerSubadd => check_loewner_subadd(inst, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{random_contraction, random_expansive, random_psd, Stream};

    fn scalar(a: f64, z: f64, f: ScalarFunction) -> Instance {
        Instance::new(f, vec![Term::new(HermitianMatrix::from_diag(&[a]), ComplexMatrix::from_diag(&[z]))])
    }

    fn opts() -> CheckOptions {
        CheckOptions::default()
    }

    #[test]
    fn thm31_scalar() {
        let v = check_thm31(&scalar(4.0, 2.0, ScalarFunction::sqrt()), &opts()).unwrap();
        assert_eq!(v.status, Status::Holds);
        assert_eq!(v.per_k_margins, Some(vec![4.0]));
        assert_eq!(v.margin, Some(4.0));
    }

    #[test]
    fn thm31_two_identities() {
        let inst = Instance::new(
            ScalarFunction::sqrt(),
            vec![Term::plain(HermitianMatrix::identity(2)), Term::plain(HermitianMatrix::identity(2))],
        );
        let v = check_thm31(&inst, &opts()).unwrap();
        let m = v.per_k_margins.unwrap();
        let r2 = 2f64.sqrt();
        assert!((m[0] - (2.0 - r2)).abs() < 1e-14);
        assert!((m[1] - (4.0 - 2.0 * r2)).abs() < 1e-14);
        assert_eq!(v.binding_k, Some(1));
    }

    #[test]
    fn thm21_identity_congruence_is_equality() {
        let mut rng = Stream::new(5);
        let a = random_psd(&mut rng, 3);
        let v = check_thm21(&a, &ComplexMatrix::identity(3), &ScalarFunction::log1p(), &opts()).unwrap();
        assert!(v.holds);
        assert!(v.per_k_margins.unwrap().iter().all(|m| m.abs() < 1e-12));
    }

    #[test]
    fn thm22_projection_pair() {
        let p = HermitianMatrix::from_diag(&[1.0, 0.0]);
        let v = check_thm22(&[p.clone(), p], &ScalarFunction::sqrt(), &opts()).unwrap();
        let m = v.per_k_margins.unwrap();
        assert!((m[0] - (2.0 - 2f64.sqrt())).abs() < 1e-14);
        assert!((m[1] - m[0]).abs() < 1e-14);
    }

    #[test]
    fn cor32_examples() {
        let v = check_cor32(&scalar(2.0, 2.0, ScalarFunction::power(2.0).unwrap()), &opts()).unwrap();
        assert_eq!(v.margin, Some(48.0));
        let inst = Instance::new(
            ScalarFunction::angle(1.0).unwrap(),
            vec![
                Term::plain(HermitianMatrix::from_diag(&[2.0, 0.0])),
                Term::plain(HermitianMatrix::from_diag(&[0.0, 2.0])),
            ],
        );
        let v = check_cor32(&inst, &opts()).unwrap();
        assert_eq!(v.per_k_margins, Some(vec![0.0, 0.0]));
        assert!(v.holds);
    }

    #[test]
    fn thm11_examples() {
        let v = check_thm11(&scalar(1.0, 3.0, ScalarFunction::sqrt()), 2.0, &opts()).unwrap();
        assert_eq!(v.margin, Some(72.0));
        let inst = Instance::new(
            ScalarFunction::sqrt(),
            vec![Term::plain(HermitianMatrix::identity(2)), Term::plain(HermitianMatrix::identity(2))],
        );
        let v = check_thm11(&inst, 2.0, &opts()).unwrap();
        // Tr(A+B)² − Tr(A² + B²) = 8 − 4
        assert_eq!(v.per_k_margins.unwrap()[1], 4.0);
        assert!(check_thm11(&inst, 1.0, &opts()).is_err());
    }

    #[test]
    fn eq1_examples() {
        let v = check_eq1(&scalar(4.0, 0.5, ScalarFunction::sqrt()), &opts()).unwrap();
        assert_eq!(v.margin, Some(0.5));
        let herm = Instance::new(
            ScalarFunction::pwl(vec![[-1.0, -2.0], [0.0, 0.0], [1.0, 0.5]]).unwrap(),
            vec![Term::new(HermitianMatrix::from_diag(&[1.0, -1.0]), ComplexMatrix::identity(2).scale(0.5))],
        );
        let v = check_eq1_hermitian(&herm, &opts()).unwrap();
        assert!(v.hypotheses_ok && v.holds, "{v:?}");
    }

    #[test]
    fn eq3_scalar_both_directions() {
        let inst = scalar(4.0, 2.0, ScalarFunction::sqrt());
        let v = check_eq3(&inst, &opts()).unwrap();
        assert_eq!(v.status, Status::HypothesisFailed);
        assert_eq!(v.margin, None);
        assert!(!v.holds);
        let v = check_eq3_reversed(&inst, &opts()).unwrap();
        assert_eq!(v.margin, Some(4.0));
        // forcing evaluates the failing claim and reports the violation
        let v = check_eq3(&inst, &CheckOptions::forced()).unwrap();
        assert_eq!(v.status, Status::Violated);
        assert!(!v.hypotheses_ok);
    }

    #[test]
    fn eq5_identity_pair() {
        let inst = Instance::new(
            ScalarFunction::sqrt(),
            vec![Term::plain(HermitianMatrix::identity(2)), Term::plain(HermitianMatrix::identity(2))],
        );
        let v = check_eq5(&inst, &opts()).unwrap();
        assert!((v.margin.unwrap() - (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-14);
        let zero = Instance::new(
            ScalarFunction::sqrt(),
            vec![Term::plain(HermitianMatrix::identity(2)), Term::plain(HermitianMatrix::zeros(2))],
        );
        assert_eq!(check_eq5(&zero, &opts()).unwrap().margin, Some(0.0));
    }

    #[test]
    fn eq2_random_contraction_certificate() {
        let mut rng = Stream::new(9);
        let a = random_psd(&mut rng, 4);
        let z = random_contraction(&mut rng, 4);
        let v = check_eq2(&Instance::new(ScalarFunction::sqrt(), vec![Term::new(a, z)]), &opts()).unwrap();
        assert!(v.holds);
        match v.certificate {
            Some(Certificate::Unitary(c)) => assert!(c.residual >= -1e-8 * c.scale),
            other => panic!("missing certificate: {other:?}"),
        }
    }

    #[test]
    fn loewner_subadd_rank_one_pair_fails() {
        // projections onto e₁ and (e₁+e₂)/√2
        let p = HermitianMatrix::from_diag(&[1.0, 0.0]);
        let q = HermitianMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let inst = Instance::new(ScalarFunction::sqrt(), vec![Term::plain(p), Term::plain(q)]);
        let v = check_loewner_subadd(&inst, &opts()).unwrap();
        assert_eq!(v.status, Status::Violated);
    }

    #[test]
    fn eq6_weyl_with_witness() {
        let mut rng = Stream::new(2);
        let inst = Instance::new(
            ScalarFunction::sqrt(),
            vec![Term::plain(random_psd(&mut rng, 2)), Term::plain(random_psd(&mut rng, 2))],
        );
        let o = CheckOptions { witness_budget: 10_000, ..opts() };
        let v = check_eq6_weyl(&inst, &o).unwrap();
        assert!(v.holds);
        assert!(matches!(v.certificate, Some(Certificate::UnitaryPair { .. })));
    }

    #[test]
    fn uchiyama_zero_summand() {
        let mut rng = Stream::new(4);
        let x = crate::generators::gaussian_matrix(&mut rng, 3, 3);
        let inst = Instance::new(
            ScalarFunction::sqrt(),
            vec![
                Term::new(HermitianMatrix::zeros(3), x),
                Term::new(HermitianMatrix::zeros(3), ComplexMatrix::zeros(3)),
            ],
        );
        let v = check_uchiyama(&inst, &opts()).unwrap();
        assert!(v.per_k_margins.unwrap().iter().all(|m| m.abs() < 1e-12));
    }

    #[test]
    fn eq9_full_rank_and_scalar() {
        let v = check_eq9(&scalar(2.0, 2.0, ScalarFunction::power(2.0).unwrap()).with_k(1), &opts()).unwrap();
        assert_eq!(v.margin, Some(48.0));
        assert_eq!(v.cut_gap, None);
        let mut rng = Stream::new(8);
        let inst = Instance::new(
            ScalarFunction::angle(1.0).unwrap(),
            vec![
                Term::new(random_psd(&mut rng, 4), random_expansive(&mut rng, 4, 1.5)),
                Term::new(random_psd(&mut rng, 4), random_expansive(&mut rng, 4, 1.5)),
            ],
        )
        .with_k(2);
        let v = check_eq9(&inst, &opts()).unwrap();
        assert!(v.holds);
        assert!(v.cut_gap.unwrap() >= 0.0);
        assert!(check_eq9(&inst.clone().with_k(5), &opts()).is_err());
    }

    #[test]
    fn wrong_term_counts_are_errors() {
        let inst = scalar(1.0, 1.0, ScalarFunction::sqrt());
        assert!(matches!(check_eq5(&inst, &opts()), Err(EngineError::Instance(_))));
        assert!(matches!(check(&inst, ClaimId::Thm11, &opts()), Err(EngineError::Instance(_))));
    }
}
