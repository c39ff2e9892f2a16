//! Shared plumbing: exit codes, selectors, settings and printing.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;

use wavered::ansatz::{catalog_entry, AnsatzSpec, CatalogEntry};
use wavered::expr::{parse, Builtin, Expr, Verdict, ZeroTest};
use wavered::io::parse_ansatz_json;
use wavered::minkowski::{Frame, NUMERIC_FRAME_TOL};

/// Final verdict of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Undecided,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Undecided => 3,
        }
    }

    pub fn from_flags(passed: bool, undecided: bool) -> Self {
        if passed {
            Outcome::Pass
        } else if undecided {
            Outcome::Undecided
        } else {
            Outcome::Fail
        }
    }

    /// Combines outcomes: any failure fails, otherwise any undecided.
    pub fn and(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::Fail, _) | (_, Outcome::Fail) => Outcome::Fail,
            (Outcome::Undecided, _) | (_, Outcome::Undecided) => Outcome::Undecided,
            _ => Outcome::Pass,
        }
    }
}

/// An error that ends the command. Bad input exits with 2, anything that
/// goes wrong afterwards with 1.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Run(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Run(_) => 1,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Run(e) => e,
        }
    }
}

pub fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

pub fn run(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Run(e.into())
}

pub type CmdResult = Result<Outcome, Failure>;

/// Global flags shared by all subcommands.
#[derive(Clone, Copy, Debug)]
pub struct Settings {
    pub json: bool,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
}

impl Settings {
    pub fn zero_test(&self) -> ZeroTest {
        ZeroTest { trials: self.trials, seed: self.seed, atol: self.tol }
    }
}

pub fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(input)
}

pub fn parse_expr(text: &str, what: &str) -> Result<Expr, Failure> {
    parse(text).with_context(|| format!("in {what}")).map_err(input)
}

pub fn parse_builtin(name: &str) -> Result<Builtin, String> {
    Builtin::ALL
        .into_iter()
        .find(|b| b.name() == name)
        .ok_or_else(|| format!("unknown function `{name}` (expected square, sin, exp or cubic)"))
}

pub fn load_frame(path: Option<&Path>) -> Result<Frame, Failure> {
    let Some(path) = path else { return Ok(Frame::canonical()) };
    let frame: Frame = serde_json::from_str(&read_file(path)?)
        .with_context(|| format!("frame file {}", path.display()))
        .map_err(input)?;
    let report = frame.validate(NUMERIC_FRAME_TOL);
    if !report.is_valid() {
        return Err(input(anyhow!("invalid frame in {}:\n{report}", path.display())));
    }
    Ok(frame)
}

/// A resolved `catalog:N` selector or JSON spec file.
pub struct Selected {
    pub spec: AnsatzSpec,
    pub entry: Option<CatalogEntry>,
}

pub fn select_ansatz(selector: &str, frame: &Frame, phi: Builtin) -> Result<Selected, Failure> {
    if let Some(n) = selector.strip_prefix("catalog:") {
        let n: usize = n.parse().map_err(|_| input(anyhow!("bad catalog selector `{selector}`")))?;
        let entry = catalog_entry(n, frame, phi)
            .ok_or_else(|| input(anyhow!("catalog has entries 1 to 4, not {n}")))?;
        return Ok(Selected { spec: entry.spec.clone(), entry: Some(entry) });
    }
    let path = Path::new(selector);
    let spec = parse_ansatz_json(&read_file(path)?)
        .with_context(|| format!("ansatz file {}", path.display()))
        .map_err(input)?;
    Ok(Selected { spec, entry: None })
}

pub fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(run)?;
    println!("{text}");
    Ok(())
}

pub fn describe_verdict(v: &Verdict) -> String {
    match v {
        Verdict::Zero { samples } => format!("holds ({samples} samples)"),
        Verdict::NonZero { witness, value } => format!("fails: value {value:.6e} at {}", point(witness)),
        Verdict::Undecided { accepted, rejected, reason } => {
            format!("undecided ({accepted} accepted, {rejected} rejected: {reason})")
        }
    }
}

pub fn point(p: &std::collections::BTreeMap<String, f64>) -> String {
    let parts: Vec<String> = p.iter().map(|(k, v)| format!("{k} = {v:.6}")).collect();
    format!("({})", parts.join(", "))
}
