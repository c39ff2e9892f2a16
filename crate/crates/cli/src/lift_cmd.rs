//! `lift`: residual of a reduced solution pushed back to four dimensions.

use std::path::PathBuf;

use anyhow::anyhow;
use clap::{Args, ValueEnum};
use serde::Serialize;

use wavered::ansatz::{catalog_entry, AnsatzSpec};
use wavered::expr::{Builtin, Expr, SamplingBox, COORDS};
use wavered::lift::{lift_closed_form, lift_grid, reduced_residual, LiftConfig, LiftError, ResidualReport, GRID_TOL};
use wavered::minkowski::Frame;
use wavered::solvers::{
    kink_solution, liouville_solution, solve_wave_1p1, spherical_wave, Boundary, ClosedFormSolution, InitialData, Rhs,
    WaveProblem,
};

use crate::common::{
    input, load_frame, parse_builtin, parse_expr, point, print_json, run, select_ansatz, CmdResult, Failure, Outcome,
    Settings,
};
use crate::solve::read_grid;

/// Pass threshold for closed-form lifts.
const CLOSED_FORM_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClosedForm {
    Kink,
    Liouville,
    Spherical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Kink,
    Liouville,
}

#[derive(Args, Debug)]
pub struct LiftArgs {
    /// `catalog:N` or a JSON ansatz file.
    #[arg(long, default_value = "catalog:1")]
    pub ansatz: String,
    #[arg(long, default_value = "square", value_parser = parse_builtin)]
    pub phi: Builtin,
    #[arg(long)]
    pub frame: Option<PathBuf>,
    #[arg(long, value_enum, conflicts_with_all = ["grid", "demo"])]
    pub closed_form: Option<ClosedForm>,
    /// Grid CSV written by `solve --out`.
    #[arg(long, conflicts_with = "demo")]
    pub grid: Option<PathBuf>,
    /// Grid header; defaults to the CSV path with a `.json` extension.
    #[arg(long, requires = "grid")]
    pub header: Option<PathBuf>,
    /// Runs the kink or Liouville showcase end to end.
    #[arg(long, value_enum)]
    pub demo: Option<Demo>,
    /// Right-hand side `F(u)`; defaults to the one the closed form solves.
    #[arg(long = "F")]
    pub rhs: Option<String>,
    /// Kink speed, orientation and shift.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub sign: i8,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub shift: f64,
    /// Liouville seeds as expressions in `t`.
    #[arg(long, default_value = "exp(t)")]
    pub f: String,
    #[arg(long, default_value = "exp(t)")]
    pub g: String,
    /// Liouville validity box `y_min,y_max,z_min,z_max`.
    #[arg(long, value_delimiter = ',', num_args = 4, allow_hyphen_values = true, default_values_t = [-3.0, 3.0, -3.0, 3.0])]
    pub validity: Vec<f64>,
    /// Spherical wave profile `g(t)` and the smallest admissible radius.
    #[arg(long, default_value = "exp(-4*(t - 2)^2)")]
    pub profile: String,
    #[arg(long, default_value_t = 0.1)]
    pub z_min: f64,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Pass threshold on the largest residual.
    #[arg(long)]
    pub max_residual: Option<f64>,
}

#[derive(Serialize)]
struct LiftReport {
    label: String,
    tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<ResidualReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    outcome: Outcome,
}

impl LiftReport {
    fn new(label: impl Into<String>, tol: f64, res: Result<ResidualReport, LiftError>) -> Result<Self, Failure> {
        let label = label.into();
        match res {
            Ok(r) => {
                let outcome = if r.passes(tol) { Outcome::Pass } else { Outcome::Fail };
                Ok(LiftReport { label, tol, report: Some(r), error: None, outcome })
            }
            Err(e @ LiftError::Undecided { .. }) => {
                Ok(LiftReport { label, tol, report: None, error: Some(e.to_string()), outcome: Outcome::Undecided })
            }
            Err(e @ LiftError::ForeignVariable(_)) => Err(input(e)),
            Err(e) => Err(run(e)),
        }
    }
}

pub fn cmd_lift(args: &LiftArgs, settings: &Settings) -> CmdResult {
    let cfg = LiftConfig::default().with_samples(args.samples).with_seed(settings.seed);
    let reports = match args.demo {
        Some(Demo::Kink) => demo_kink(cfg)?,
        Some(Demo::Liouville) => demo_liouville(cfg)?,
        None => vec![single(args, cfg)?],
    };
    let outcome = reports.iter().fold(Outcome::Pass, |acc, r| acc.and(r.outcome));
    if settings.json {
        if args.demo.is_some() {
            print_json(&reports)?;
        } else {
            print_json(&reports[0])?;
        }
    } else {
        for r in &reports {
            print_human(r);
        }
    }
    Ok(outcome)
}

fn single(args: &LiftArgs, cfg: LiftConfig) -> Result<LiftReport, Failure> {
    let frame = load_frame(args.frame.as_deref())?;
    let spec = select_ansatz(&args.ansatz, &frame, args.phi)?.spec;
    if let Some(path) = &args.grid {
        let grid = read_grid(path, args.header.as_deref())?;
        let f = parse_expr(args.rhs.as_deref().unwrap_or("0"), "--F")?;
        let tol = args.max_residual.unwrap_or(GRID_TOL);
        return LiftReport::new(format!("grid {}", path.display()), tol, lift_grid(&spec, &grid, &f, cfg));
    }
    let which = args.closed_form.ok_or_else(|| input(anyhow!("give one of --closed-form, --grid or --demo")))?;
    let (sol, default_rhs) = match which {
        ClosedForm::Kink => (kink_solution(args.c, args.sign, args.shift).map_err(input)?, "sin(u)"),
        ClosedForm::Liouville => {
            let v = &args.validity;
            let validity = SamplingBox::new(&["y", "z"], &[v[0], v[2]], &[v[1], v[3]]);
            let (f, g) = (parse_expr(&args.f, "--f")?, parse_expr(&args.g, "--g")?);
            (liouville_solution(&f, &g, validity).map_err(run)?, "exp(u)")
        }
        ClosedForm::Spherical => (spherical_wave(&parse_expr(&args.profile, "--profile")?, args.z_min).map_err(input)?, "0"),
    };
    let f = parse_expr(args.rhs.as_deref().unwrap_or(default_rhs), "--F")?;
    let tol = args.max_residual.unwrap_or(CLOSED_FORM_TOL);
    LiftReport::new(format!("{} through {}", sol.name, args.ansatz), tol, lift_closed_form(&spec, &sol, &f, cfg))
}

fn entry_one() -> AnsatzSpec {
    catalog_entry(1, &Frame::canonical(), Builtin::Square).expect("catalog entry 1").spec
}

fn with_box(spec: AnsatzSpec, min: [f64; 4], max: [f64; 4]) -> Result<AnsatzSpec, Failure> {
    spec.with_domain(SamplingBox::new(&COORDS, &min, &max)).map_err(run)
}

/// Reduced and lifted residuals of a closed form.
fn both(
    label: &str,
    spec: &AnsatzSpec,
    sol: &ClosedFormSolution,
    f: &str,
    cfg: LiftConfig,
    out: &mut Vec<LiftReport>,
) -> Result<(), Failure> {
    let f = parse_expr(f, "demo")?;
    let entry = catalog_entry(1, &Frame::canonical(), Builtin::Square).expect("catalog entry 1");
    let eq = entry.reduced.with_rhs(f.subs("u", &Expr::var("phi"))).map_err(run)?;
    out.push(LiftReport::new(format!("{label}: reduced"), CLOSED_FORM_TOL, reduced_residual(&eq, sol, cfg))?);
    out.push(LiftReport::new(format!("{label}: lifted"), CLOSED_FORM_TOL, lift_closed_form(spec, sol, &f, cfg))?);
    Ok(())
}

fn demo_kink(cfg: LiftConfig) -> Result<Vec<LiftReport>, Failure> {
    let spec = entry_one();
    let mut out = Vec::new();
    for c in [0.0, 0.5, 0.9] {
        let sol = kink_solution(c, 1, 0.0).map_err(run)?;
        both(&format!("kink c = {c}"), &spec, &sol, "sin(u)", cfg, &mut out)?;
    }
    // the same kink evolved numerically and lifted from the grid
    let kink = kink_solution(0.5, 1, 0.0).map_err(run)?;
    let p = WaveProblem {
        rhs: Rhs::new(&Expr::var("phi").sin()).map_err(run)?,
        init: InitialData::from_closed_form(&kink),
        z_range: (-6.0, 6.0),
        t_end: 1.0,
        hy: 0.01,
        hz: 0.02,
        boundary: Boundary::Dirichlet(kink.field()),
    };
    let grid = solve_wave_1p1(&p).map_err(run)?;
    let spec = with_box(spec, [0.2, -2.0, -2.0, -2.0], [0.8, 2.0, 2.0, 2.0])?;
    let f = Expr::var("u").sin();
    out.push(LiftReport::new("kink c = 0.5: wave1p1 grid lifted", GRID_TOL, lift_grid(&spec, &grid, &f, cfg))?);
    Ok(out)
}

fn demo_liouville(cfg: LiftConfig) -> Result<Vec<LiftReport>, Failure> {
    let t = Expr::var("t");
    let mut out = Vec::new();
    let sol = liouville_solution(&t.clone().exp(), &t.clone().exp(), SamplingBox::cube(&["y", "z"], -3.0, 3.0))
        .map_err(run)?;
    both("liouville f = g = exp(t)", &entry_one(), &sol, "exp(u)", cfg, &mut out)?;
    let sol = liouville_solution(&t, &t, SamplingBox::new(&["y", "z"], &[0.1, -3.0], &[3.0, 3.0])).map_err(run)?;
    let spec = with_box(entry_one(), [0.1, -2.0, -2.0, -2.0], [2.0, 2.0, 2.0, 2.0])?;
    both("liouville f = g = t", &spec, &sol, "exp(u)", cfg, &mut out)?;
    Ok(out)
}

fn print_human(r: &LiftReport) {
    let verdict = match r.outcome {
        Outcome::Pass => "pass",
        Outcome::Fail => "fail",
        Outcome::Undecided => "undecided",
    };
    match (&r.report, &r.error) {
        (Some(rep), _) => {
            println!(
                "{}: max residual {:.3e}, mean {:.3e} ({} samples, {} rejected), bound {:.1e}: {verdict}",
                r.label, rep.max, rep.mean, rep.samples_used, rep.samples_rejected, r.tol
            );
            if let Some(p) = &rep.worst_point {
                println!("  worst point {}", point(p));
            }
        }
        (None, Some(e)) => println!("{}: {e}: {verdict}", r.label),
        (None, None) => println!("{}: {verdict}", r.label),
    }
}
