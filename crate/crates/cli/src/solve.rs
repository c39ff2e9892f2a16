//! `solve`: runs one of the reduced-equation solvers and writes the grid.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, ValueEnum};
use serde::Serialize;

use wavered::solvers::{
    field_from_expr, kink_solution, profile_from_expr, solve_elliptic, solve_radial_ode, solve_radial_wave,
    solve_wave_1p1, spherical_wave, Boundary, ClosedFormSolution, EllipticProblem, Field, GridHeader, GridSolution,
    InitialData, RadialOdeProblem, RadialScheme, Rhs, WaveProblem,
};

use crate::common::{input, parse_expr, print_json, run, CmdResult, Failure, Outcome, Settings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Equation {
    /// `φ_yy − φ_zz = F(φ)` on a line.
    Wave1p1,
    /// `φ_yy − φ_zz − (2/z) φ_z = F(φ)` for `z > 0`.
    RadialWave,
    /// `φ_yy + φ_zz = F(φ, y, z)` on a rectangle with Dirichlet data.
    Elliptic,
    /// `−φ'' − φ'/y = F(φ)`.
    RadialOde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Direct,
    Substituted,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(value_enum)]
    pub equation: Equation,
    /// Right-hand side in `phi` (or `u`); the elliptic solver also accepts `y`, `z`.
    #[arg(long = "F", default_value = "0")]
    pub rhs: String,
    /// Initial data: `kink`, `spherical`, `zero`, or an expression in `z`.
    #[arg(long)]
    pub init: Option<String>,
    /// Initial `φ_y` as an expression in `z` (with an expression `--init`).
    #[arg(long)]
    pub dinit: Option<String>,
    /// Kink speed.
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    /// Profile `g(t)` of the spherical wave `g(z − y)/z`.
    #[arg(long, default_value = "exp(-4*(t - 2)^2)")]
    pub profile: String,
    /// Final time of the wave solvers.
    #[arg(long = "T", default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub z_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_max: Option<f64>,
    #[arg(long)]
    pub hy: Option<f64>,
    #[arg(long)]
    pub hz: Option<f64>,
    /// Step of the elliptic grid and the radial ODE.
    #[arg(long)]
    pub h: Option<f64>,
    /// `periodic`, `exact` (closed-form data), or an expression in `y, z`.
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long, value_enum, default_value = "direct")]
    pub scheme: SchemeArg,
    /// Stopping threshold on the largest sweep update (elliptic).
    #[arg(long, default_value_t = 1e-10)]
    pub solver_tol: f64,
    #[arg(long, default_value_t = 20000)]
    pub max_iter: usize,
    /// Over-relaxation factor; defaults to the Laplace optimum for the grid.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub y0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub dphi0: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub y_end: f64,
    /// CSV output; the JSON header goes next to it with a `.json` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Summary printed after a solve.
#[derive(Serialize)]
struct SolveSummary {
    equation: String,
    header: GridHeader,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<[f64; 3]>>,
}

fn equation_name(e: Equation) -> String {
    e.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

pub fn cmd_solve(args: &SolveArgs, settings: &Settings) -> CmdResult {
    let rhs = Rhs::new(&parse_expr(&args.rhs, "--F")?).map_err(input)?;
    if args.equation == Equation::RadialOde {
        return radial_ode(args, rhs, settings);
    }
    let (grid, exact) = match args.equation {
        Equation::Wave1p1 | Equation::RadialWave => wave(args, rhs)?,
        Equation::Elliptic => (elliptic(args, rhs)?, None),
        Equation::RadialOde => unreachable!(),
    };
    let max_error = exact.as_ref().map(|sol| {
        let f = sol.field();
        grid.max_error(|y, z| f(y, z))
    });
    let mut summary = SolveSummary {
        equation: equation_name(args.equation),
        header: grid.header(),
        exact: exact.as_ref().map(|s| s.expr.to_string()),
        max_error,
        output: None,
        rows: None,
    };
    match &args.out {
        Some(path) => {
            write_grid(&grid, path)?;
            summary.output = Some(path.display().to_string());
            if settings.json {
                print_json(&summary)?;
            } else {
                print_summary(&summary);
            }
        }
        None if settings.json => {
            summary.rows = Some(grid.values.indexed_iter().map(|((i, j), v)| [grid.y(i), grid.z(j), *v]).collect());
            print_json(&summary)?;
        }
        None => {
            grid.write_csv(io::stdout().lock()).map_err(run)?;
            print_summary_to_stderr(&summary);
        }
    }
    Ok(Outcome::Pass)
}

fn header_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn write_grid(grid: &GridSolution, path: &Path) -> Result<(), Failure> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display())).map_err(run)?;
    grid.write_csv(BufWriter::new(file)).map_err(run)?;
    let header = serde_json::to_string_pretty(&grid.header()).map_err(run)?;
    let hpath = header_path(path);
    std::fs::write(&hpath, header + "\n").with_context(|| format!("cannot write {}", hpath.display())).map_err(run)?;
    Ok(())
}

fn print_summary(s: &SolveSummary) {
    let h = &s.header;
    println!("{}: {} grid, {} x {} points", s.equation, h.meta.scheme, h.ny, h.nz);
    if let Some(iter) = h.meta.iterations {
        println!("iterations: {iter}");
    }
    if let (Some(e), Some(err)) = (&s.exact, s.max_error) {
        println!("max error against {e}: {err:.3e}");
    }
    if let Some(out) = &s.output {
        println!("wrote {out}");
    }
}

fn print_summary_to_stderr(s: &SolveSummary) {
    let h = &s.header;
    eprintln!("{}: {} grid, {} x {} points", s.equation, h.meta.scheme, h.ny, h.nz);
    if let Some(err) = s.max_error {
        eprintln!("max error against the closed form: {err:.3e}");
    }
}

fn wave(args: &SolveArgs, rhs: Rhs) -> Result<(GridSolution, Option<ClosedFormSolution>), Failure> {
    let radial = args.equation == Equation::RadialWave;
    let init_name = args.init.as_deref().unwrap_or(if radial { "spherical" } else { "kink" });
    // closed-form data, with the right-hand side it solves
    let (closed, solves) = match init_name {
        "kink" => (Some(kink_solution(args.c, 1, 0.0).map_err(input)?), "sin(phi)"),
        "spherical" => {
            let g = parse_expr(&args.profile, "--profile")?;
            (Some(spherical_wave(&g, 1e-3).map_err(input)?), "0")
        }
        _ => (None, ""),
    };
    let reference_ok = closed.is_some() && rhs.expr == parse_expr(solves, "closed form")? && (radial == (init_name == "spherical"));
    let init = match (&closed, init_name) {
        (Some(sol), _) => InitialData::from_closed_form(sol),
        (None, "zero") => InitialData::zero(),
        (None, text) => {
            let phi = profile_from_expr(&parse_expr(text, "--init")?, "z").map_err(input)?;
            let dphi = match &args.dinit {
                Some(t) => profile_from_expr(&parse_expr(t, "--dinit")?, "z").map_err(input)?,
                None => Arc::new(|_| 0.0),
            };
            InitialData::new(phi, dphi)
        }
    };
    let default_z = if radial { (0.5, 5.0) } else { (-10.0, 10.0) };
    let z_range = (args.z_min.unwrap_or(default_z.0), args.z_max.unwrap_or(default_z.1));
    let hz = args.hz.unwrap_or(0.02);
    let boundary = match args.boundary.as_deref() {
        Some("periodic") => Boundary::Periodic,
        Some("exact") | None if closed.is_some() => Boundary::Dirichlet(closed.as_ref().unwrap().field()),
        Some("exact") => return Err(input(anyhow!("--boundary exact needs closed-form initial data"))),
        None if radial => return Err(input(anyhow!("the radial solver needs --boundary exact or an expression"))),
        None => Boundary::Periodic,
        Some(text) => Boundary::Dirichlet(field_from_expr(&parse_expr(text, "--boundary")?).map_err(input)?),
    };
    let problem = WaveProblem { rhs, init, z_range, t_end: args.t_end, hy: args.hy.unwrap_or(hz / 2.0), hz, boundary };
    let grid = if radial {
        let scheme = match args.scheme {
            SchemeArg::Direct => RadialScheme::Direct,
            SchemeArg::Substituted => RadialScheme::Substituted,
        };
        solve_radial_wave(&problem, scheme)
    } else {
        solve_wave_1p1(&problem)
    }
    .map_err(run)?;
    Ok((grid, closed.filter(|_| reference_ok)))
}

fn elliptic(args: &SolveArgs, rhs: Rhs) -> Result<GridSolution, Failure> {
    let boundary: Field = match args.boundary.as_deref() {
        None => Arc::new(|_, _| 0.0),
        Some(text) => field_from_expr(&parse_expr(text, "--boundary")?).map_err(input)?,
    };
    let y_range = (args.y_min.unwrap_or(0.0), args.y_max.unwrap_or(1.0));
    let z_range = (args.z_min.unwrap_or(0.0), args.z_max.unwrap_or(1.0));
    let mut p = EllipticProblem::new(rhs, y_range, z_range, args.h.unwrap_or(0.05), boundary);
    p.tol = args.solver_tol;
    p.max_iter = args.max_iter;
    p.omega = args.omega.unwrap_or_else(|| p.optimal_omega());
    solve_elliptic(&p).map_err(run)
}

#[derive(Serialize)]
struct OdeTable {
    scheme: String,
    y: Vec<f64>,
    phi: Vec<f64>,
    dphi: Vec<f64>,
}

fn radial_ode(args: &SolveArgs, rhs: Rhs, settings: &Settings) -> CmdResult {
    let p = RadialOdeProblem::new(rhs, args.y0, args.phi0, args.dphi0, args.y_end, args.h.unwrap_or(0.01));
    let sol = solve_radial_ode(&p).map_err(run)?;
    let table = OdeTable { scheme: sol.meta.scheme.clone(), y: sol.y, phi: sol.phi, dphi: sol.dphi };
    let write_table = |out: &mut dyn Write| -> io::Result<()> {
        writeln!(out, "y,phi,dphi")?;
        for k in 0..table.y.len() {
            writeln!(out, "{},{},{}", table.y[k], table.phi[k], table.dphi[k])?;
        }
        out.flush()
    };
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("cannot create {}", path.display())).map_err(run)?;
            write_table(&mut BufWriter::new(file)).map_err(run)?;
            if !settings.json {
                println!("radial-ode: {} steps, wrote {}", table.y.len() - 1, path.display());
            }
        }
        None if !settings.json => write_table(&mut io::stdout().lock()).map_err(run)?,
        None => {}
    }
    if settings.json {
        print_json(&table)?;
    }
    Ok(Outcome::Pass)
}

/// Reads a grid written by `solve --out`.
pub fn read_grid(csv: &Path, header: Option<&Path>) -> Result<GridSolution, Failure> {
    let hpath = header.map(Path::to_path_buf).unwrap_or_else(|| header_path(csv));
    let header: GridHeader = serde_json::from_str(&crate::common::read_file(&hpath)?)
        .with_context(|| format!("grid header {}", hpath.display()))
        .map_err(input)?;
    let file = File::open(csv).with_context(|| format!("cannot open {}", csv.display())).map_err(input)?;
    GridSolution::read_csv(&header, file).with_context(|| format!("grid {}", csv.display())).map_err(input)
}

