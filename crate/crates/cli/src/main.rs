//! `normlab`: check, fuzz, falsify, certify and approx.
//!
//! Exit codes: 0 success (or inconclusive), 1 violation / search exhausted /
//! failed certificate, 2 usage, parse or hypothesis errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use normlab::engine::{congruence_sides, dominance_unitary, EngineError};
use normlab::harness::{
    approx_table, falsify, parse_grid, run_campaign, shrink_violation, witness_json, Campaign, FalsifyConfig,
};
use normlab::{check, CheckOptions, ClaimId, Instance, Solver, Status, Tolerances};

const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "normlab", version, about = "Numerical checks of matrix norm inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one instance file against a claim.
    Check(CheckArgs),
    /// Run a seeded campaign of generated instances.
    Fuzz(FuzzArgs),
    /// Search for a counterexample to a negative claim.
    Falsify(FalsifyArgs),
    /// Emit the aligning unitary for an eigenvalue dominance.
    Certify(CertifyArgs),
    /// Tabulate the angle function against its smoothings as CSV.
    Approx(ApproxArgs),
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    /// Claim id; defaults to the instance's "claim" field.
    #[arg(long)]
    claim: Option<String>,
    /// Holding tolerance relative to the claim's scale.
    #[arg(long)]
    tol: Option<f64>,
    /// Evaluate even when hypotheses fail.
    #[arg(long)]
    force: bool,
    /// Witness search budget for eq6-weyl.
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the shrunk witness of a violation.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long)]
    claim: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 8)]
    dim_max: usize,
    #[arg(long, default_value_t = 4)]
    terms_max: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// JSONL report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add per-trial wall time ("ms") to the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct FalsifyArgs {
    /// One of eq4-nonpsd, eq2-reversed, loewner-subadd.
    #[arg(long)]
    claim: String,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    dim_max: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Witness file path; defaults to falsify-<claim>.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    instance: PathBuf,
    /// eq2, contractive-sum, or thm-dominance (L and R are the two A fields).
    #[arg(long)]
    claim: String,
}

#[derive(Args)]
struct ApproxArgs {
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Comma-separated smoothing parameters.
    #[arg(long, value_delimiter = ',', default_value = "1,1e-2,1e-4")]
    r: Vec<f64>,
    /// lo:hi:steps
    #[arg(long, default_value = "0:10:10000")]
    grid: String,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(USAGE)
}

fn jobs(j: Option<usize>) -> usize {
    j.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn parse_claim(s: &str) -> Result<ClaimId, EngineError> {
    s.parse()
}

fn read_instance(path: &Path) -> Result<Instance, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))
}

fn tolerances(tol: Option<f64>) -> Result<Tolerances, String> {
    match tol {
        None => Ok(Tolerances::default()),
        Some(t) if t.is_finite() && t >= 0.0 => Ok(Tolerances::with_holds(t)),
        Some(t) => Err(format!("--tol must be a non-negative number, got {t}")),
    }
}

fn cmd_check(args: CheckArgs) -> ExitCode {
    let inst = match read_instance(&args.instance) {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    let claim = match args.claim.as_deref().map(parse_claim).or(inst.claim.map(Ok)) {
        Some(Ok(c)) => c,
        Some(Err(e)) => return fail(e),
        None => return fail("no claim given and the instance has no \"claim\" field"),
    };
    let tolerances = match tolerances(args.tol) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let opts = CheckOptions { tolerances, force: args.force, witness_budget: args.budget, witness_seed: args.seed };
    let verdict = match check(&inst, claim, &opts) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let mut out = serde_json::to_value(&verdict).expect("verdicts serialize");
    let code = match verdict.status {
        Status::Holds | Status::Inconclusive => ExitCode::SUCCESS,
        Status::HypothesisFailed => ExitCode::from(USAGE),
        Status::Violated => {
            let shrunk = shrink_violation(&inst.clone().with_claim(claim), claim, &opts);
            let shrunk_verdict = check(&shrunk, claim, &opts).unwrap_or(verdict.clone());
            let witness = witness_json(&shrunk, &shrunk_verdict);
            if let Some(path) = &args.out {
                if let Err(e) = write_json(path, &witness) {
                    return fail(e);
                }
            }
            out["witness"] = witness;
            ExitCode::from(1)
        }
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("json values serialize"));
    code
}

fn cmd_fuzz(args: FuzzArgs) -> ExitCode {
    let claim = match parse_claim(&args.claim) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let tolerances = match tolerances(args.tol) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let campaign = Campaign {
        dim_max: args.dim_max,
        terms_max: args.terms_max,
        tolerances,
        jobs: jobs(args.jobs),
        timing: args.timing,
        ..Campaign::new(claim, args.trials, args.seed)
    };
    let report = match run_campaign(&campaign) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let jsonl = report.to_jsonl();
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &jsonl) {
                return fail(format!("{}: {e}", path.display()));
            }
        }
        None => print!("{jsonl}"),
    }
    let (held, inconclusive, failed) =
        (report.count(Status::Holds), report.count(Status::Inconclusive), report.count(Status::HypothesisFailed));
    eprintln!(
        "{claim}: {} trials, {held} hold, {inconclusive} inconclusive, {} violated, {failed} hypothesis failures",
        report.records.len(),
        report.violations.len()
    );
    let opts = CheckOptions { tolerances, ..CheckOptions::default() };
    for v in &report.violations {
        let shrunk = shrink_violation(&v.instance, claim, &opts);
        let verdict = check(&shrunk, claim, &opts).unwrap_or(v.verdict.clone());
        let path = witness_path(args.out.as_deref(), &format!("{claim}-trial{}", v.trial));
        if let Err(e) = write_json(&path, &witness_json(&shrunk, &verdict)) {
            return fail(e);
        }
        eprintln!("witness for trial {} written to {}", v.trial, path.display());
    }
    if !report.violations.is_empty() {
        ExitCode::from(1)
    } else if failed > 0 {
        ExitCode::from(USAGE)
    } else {
        ExitCode::SUCCESS
    }
}

/// `<report stem>.witness-<tag>.json` next to the report, or in the
/// working directory without one.
fn witness_path(report: Option<&Path>, tag: &str) -> PathBuf {
    match report {
        Some(p) => {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
            p.with_file_name(format!("{stem}.witness-{tag}.json"))
        }
        None => PathBuf::from(format!("witness-{tag}.json")),
    }
}

fn cmd_falsify(args: FalsifyArgs) -> ExitCode {
    let target = match parse_claim(&args.claim) {
        Ok(c) if c.is_falsification_target() => c,
        Ok(c) => return fail(format!("{c} is not a falsification target")),
        Err(e) => return fail(e),
    };
    let mut cfg = FalsifyConfig::new(target, args.budget, args.seed);
    cfg.jobs = jobs(args.jobs);
    if let Some(d) = args.dim_max {
        cfg.dim_max = d.max(cfg.dim_min);
    }
    let outcome = match falsify(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let summary = serde_json::json!({
        "target": target,
        "budget": outcome.budget,
        "trials_run": outcome.trials_run,
        "found": outcome.discovery.is_some(),
    });
    match &outcome.discovery {
        Some(d) => {
            let path = args.out.unwrap_or_else(|| PathBuf::from(format!("falsify-{target}.json")));
            if let Err(e) = write_json(&path, &witness_json(&d.instance, &d.verdict)) {
                return fail(e);
            }
            let mut s = summary;
            s["trial"] = d.trial.into();
            s["original_n"] = d.original_n.into();
            s["n"] = d.instance.n().into();
            s["margin"] = serde_json::to_value(d.verdict.margin).unwrap();
            s["witness"] = path.display().to_string().into();
            println!("{s}");
            ExitCode::SUCCESS
        }
        None => {
            println!("{summary}");
            ExitCode::from(1)
        }
    }
}

fn cmd_certify(args: CertifyArgs) -> ExitCode {
    let inst = match read_instance(&args.instance) {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    let sides = match args.claim.as_str() {
        "eq2" | "contractive-sum" => {
            if args.claim == "eq2" && inst.m() != 1 {
                return fail("eq2 takes a single term");
            }
            congruence_sides(&Solver::default(), &inst)
        }
        "thm-dominance" => {
            if inst.m() != 2 {
                return fail("thm-dominance takes two terms whose A fields are L and R");
            }
            Ok((inst.terms[0].a.clone(), inst.terms[1].a.clone()))
        }
        other => return fail(format!("certify supports eq2, contractive-sum and thm-dominance, got {other:?}")),
    };
    let (l, r) = match sides {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match dominance_unitary(&l, &r) {
        Ok(cert) => {
            let verified = cert.verify(&l, &r, 1e-8).unwrap_or(false);
            let out = serde_json::json!({ "claim": args.claim, "verified": verified, "certificate": cert });
            println!("{}", serde_json::to_string_pretty(&out).expect("json values serialize"));
            if verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ EngineError::Certificate { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => fail(e),
    }
}

fn cmd_approx(args: ApproxArgs) -> ExitCode {
    let grid = match parse_grid(&args.grid) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let table = match approx_table(args.a, &args.r, &grid) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    print!("{}", table.to_csv());
    if table.within_bounds() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Fuzz(a) => cmd_fuzz(a),
        Command::Falsify(a) => cmd_falsify(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Approx(a) => cmd_approx(a),
    }
}
