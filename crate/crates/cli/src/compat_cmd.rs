//! `check-compat`: necessary conditions for a canonical system.

use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;

use wavered::compat::{
    check_first_order, check_theorem1, check_theorem2, check_theorem3, CanonicalSystem, CompatConfig, CompatError,
    CompatReport, SystemKind,
};

use crate::common::{
    describe_verdict, input, parse_expr, print_json, read_file, run, CmdResult, Failure, Outcome, Settings,
};

#[derive(Args, Debug)]
pub struct CompatArgs {
    /// JSON system file, e.g. `{"kind": "elliptic", "h": "1", "V": "1/vs", "n": 3}`.
    pub system: PathBuf,
    /// Seed `Φ` (elliptic, hyperbolic and parabolic systems).
    #[arg(long)]
    pub phi: Option<String>,
    /// Seed `Ψ` (hyperbolic systems).
    #[arg(long)]
    pub psi: Option<String>,
    /// Overrides the number of spatial coordinates in the file.
    #[arg(long)]
    pub n: Option<u32>,
    /// Half width of the sampling square for the pair variables.
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
}

fn compat_failure(e: CompatError) -> Failure {
    match e {
        CompatError::Eval(_) => run(e),
        other => input(other),
    }
}

pub fn cmd_check_compat(args: &CompatArgs, settings: &Settings) -> CmdResult {
    let text = read_file(&args.system)?;
    let mut sys: CanonicalSystem = serde_json::from_str(&text)
        .with_context(|| format!("system file {}", args.system.display()))
        .map_err(input)?;
    if let Some(n) = args.n {
        sys.n = n;
    }
    let seed = |flag: &Option<String>, name: &str| -> Result<_, Failure> {
        let text = flag.as_deref().ok_or_else(|| input(anyhow!("{} systems need --{name}", sys.kind)))?;
        parse_expr(text, &format!("--{name}"))
    };
    let cfg = CompatConfig { test: settings.zero_test(), half_width: args.half_width };
    let report = match sys.kind {
        SystemKind::Elliptic => check_theorem1(&sys, &seed(&args.phi, "phi")?, &cfg),
        SystemKind::Hyperbolic => check_theorem2(&sys, &seed(&args.phi, "phi")?, &seed(&args.psi, "psi")?, &cfg),
        SystemKind::Parabolic => check_theorem3(&sys, &seed(&args.phi, "phi")?, &cfg),
        SystemKind::FirstOrder => check_first_order(&sys, &cfg),
    }
    .map_err(compat_failure)?;

    if settings.json {
        print_json(&report)?;
    } else {
        print_human(&report);
    }
    Ok(if report.passed() {
        Outcome::Pass
    } else if report.conditions.iter().any(|c| c.verdict.is_nonzero()) {
        Outcome::Fail
    } else {
        Outcome::Undecided
    })
}

fn print_human(rep: &CompatReport) {
    println!("{} ({} system, n = {})", rep.theorem, rep.kind, rep.n);
    for c in &rep.conditions {
        println!("  {}: {}", c.name, describe_verdict(&c.verdict));
        if let Some(cert) = &c.certificate {
            for (k, step) in cert.chain.iter().enumerate() {
                println!("    step {k}: {step}");
            }
        }
    }
    for x in &rep.excluded {
        println!("  excluded: |{}| < {}", x.expr, x.radius);
    }
    println!("status: {}", rep.status);
}
