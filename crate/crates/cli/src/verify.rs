//! `verify-ansatz`: invariants, functional dependence, claimed coefficients
//! and classification of one ansatz.

use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::Serialize;

use wavered::ansatz::{
    classify_case, compute_invariants, depends_only_on_yz, verify_reduction, Case, ClassifyConfig, Dependence,
    Invariants, LevelSetTest, ReducedEquation, VerificationReport,
};
use wavered::expr::Expr;
use wavered::io::parse_reduced_json;

use crate::common::{
    describe_verdict, input, load_frame, parse_builtin, point, print_json, read_file, run, select_ansatz, CmdResult,
    Outcome, Settings,
};

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// `catalog:N` (N = 1..4) or a JSON ansatz file.
    pub ansatz: String,
    /// JSON file with the claimed coefficients `r, q, s, R, S` in `(y, z)`.
    #[arg(long)]
    pub claimed: Option<PathBuf>,
    /// Implementation of the arbitrary function in catalog entry 3.
    #[arg(long, default_value = "square", value_parser = parse_builtin)]
    pub phi: wavered::expr::Builtin,
    /// JSON frame `{"a": [..], "b": [..], "c": [..], "d": [..]}`.
    #[arg(long)]
    pub frame: Option<PathBuf>,
}

#[derive(Serialize)]
struct DependenceEntry {
    name: &'static str,
    #[serde(flatten)]
    result: Dependence,
}

#[derive(Serialize)]
struct VerifyReport {
    y: Expr,
    z: Expr,
    invariants: Invariants,
    dependence: Vec<DependenceEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    claimed: Option<ReducedEquation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<VerificationReport>,
    case: Case,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_case: Option<Case>,
    outcome: Outcome,
}

pub fn cmd_verify_ansatz(args: &VerifyArgs, settings: &Settings) -> CmdResult {
    let frame = load_frame(args.frame.as_deref())?;
    let selected = select_ansatz(&args.ansatz, &frame, args.phi)?;
    let spec = &selected.spec;
    let claimed = match &args.claimed {
        Some(path) => Some(
            parse_reduced_json(&read_file(path)?)
                .with_context(|| format!("claimed reduction {}", path.display()))
                .map_err(input)?,
        ),
        None => selected.entry.as_ref().map(|e| e.reduced.clone()),
    };

    let raw = compute_invariants(spec).map_err(input)?.raw;
    let level = LevelSetTest { seed: settings.seed, ..LevelSetTest::default() };
    let mut dependence = Vec::new();
    let mut outcome = Outcome::Pass;
    for (name, inv) in raw.named() {
        let result = depends_only_on_yz(inv, spec, level).map_err(run)?;
        outcome = outcome.and(match &result {
            Dependence::OnlyYZ { .. } => Outcome::Pass,
            Dependence::Witness { .. } => Outcome::Fail,
            Dependence::Undecided { .. } => Outcome::Undecided,
        });
        dependence.push(DependenceEntry { name, result });
    }

    let verification = match &claimed {
        Some(eq) => {
            let rep = verify_reduction(spec, &raw, eq, settings.zero_test()).map_err(input)?;
            outcome = outcome.and(Outcome::from_flags(rep.passed(), rep.undecided()));
            Some(rep)
        }
        None => None,
    };

    let cfg = ClassifyConfig { seed: settings.seed, trials: settings.trials, atol: settings.tol, ..Default::default() };
    let case = classify_case(&raw.r, &raw.q, &raw.s, &spec.domain, &spec.opaque, cfg);
    let expected_case = selected.entry.as_ref().map(|e| e.expected.clone());
    if let Some(expected) = &expected_case {
        if *expected != case {
            outcome = outcome.and(Outcome::Fail);
        }
    }

    let report = VerifyReport {
        y: spec.y.clone(),
        z: spec.z.clone(),
        invariants: raw,
        dependence,
        claimed,
        verification,
        case,
        expected_case,
        outcome,
    };
    if settings.json {
        print_json(&report)?;
    } else {
        print_human(&report);
    }
    Ok(outcome)
}

fn print_human(rep: &VerifyReport) {
    println!("y = {}", rep.y);
    println!("z = {}", rep.z);
    println!("invariants:");
    for (name, inv) in rep.invariants.named() {
        println!("  {name} = {inv}");
    }
    println!("functional dependence on (y, z):");
    for d in &rep.dependence {
        match &d.result {
            Dependence::OnlyYZ { pairs } => println!("  {}: ok ({pairs} level-set pairs)", d.name),
            Dependence::Witness { first, second, values } => {
                println!("  {}: not a function of (y, z)", d.name);
                println!("    {} = {:.6e} at {}", d.name, values.0, point(first));
                println!("    {} = {:.6e} at {}", d.name, values.1, point(second));
            }
            Dependence::Undecided { found, reason } => {
                println!("  {}: undecided ({found} pairs found: {reason})", d.name)
            }
        }
    }
    if let (Some(eq), Some(v)) = (&rep.claimed, &rep.verification) {
        println!("claimed reduction (F = {}):", eq.rhs);
        for c in &v.checks {
            println!("  {} = {}: {}", c.name, c.claimed, describe_verdict(&c.verdict));
        }
    }
    println!("case: {}", rep.case.name());
    if let Some(e) = &rep.expected_case {
        println!("expected case: {}", e.name());
    }
    println!("result: {}", outcome_word(rep.outcome));
}

pub fn outcome_word(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Fail => "fail",
        Outcome::Undecided => "undecided",
    }
}
