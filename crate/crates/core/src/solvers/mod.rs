//! Numerical solvers for the reduced equations and closed-form families.
//!
//! Grids store `φ` with rows indexed by `y` and columns by `z`. For the
//! hyperbolic equations `y` is the evolution variable.

mod closed_form;
mod elliptic;
mod grid;
mod radial_ode;
mod wave;

use std::sync::Arc;

use thiserror::Error;

use crate::expr::eval::eval_f64;
use crate::expr::{EvalError, Expr};

pub use closed_form::{kink_solution, liouville_solution, spherical_wave, ClosedFormError, ClosedFormSolution};
pub use elliptic::{solve_elliptic, EllipticProblem};
pub use grid::{GridHeader, GridSolution, SolverMeta};
pub use radial_ode::{solve_radial_ode, RadialOdeProblem, RadialSolution};
pub use wave::{solve_radial_wave, solve_wave_1p1, Boundary, InitialData, RadialScheme, WaveProblem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("CFL condition violated: hy = {hy} > hz = {hz}")]
    Cfl { hy: f64, hz: f64 },
    #[error("solution blew up; last finite layer is {last_stable}")]
    BlowUp { last_stable: usize },
    #[error("no convergence after {iterations} iterations (last update {last_update:.3e})")]
    NotConverged { iterations: usize, last_update: f64, residual_history: Vec<f64> },
    #[error("invalid setup: {0}")]
    Setup(String),
    #[error("start step too large: series and integrator differ by {disagreement:.3e}")]
    StartStep { disagreement: f64 },
    #[error("variable `{0}` is not allowed in the right-hand side")]
    ForeignVariable(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Callback of two variables, e.g. boundary data `g(y, z)`.
pub type Field = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Callback of one variable, e.g. initial data in `z`.
pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A right-hand side `F(φ, y, z)` with its `φ`-derivative.
///
/// `u` is accepted as a synonym of `phi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rhs {
    pub expr: Expr,
    pub dphi: Expr,
}

impl Rhs {
    pub fn new(f: &Expr) -> Result<Self, SolverError> {
        let expr = f.subs("u", &Expr::var("phi"));
        if let Some(v) = expr.free_vars().into_iter().find(|v| !["phi", "y", "z"].contains(&v.as_str())) {
            return Err(SolverError::ForeignVariable(v));
        }
        if let Some(name) = expr.opaque_names().into_iter().next() {
            return Err(SolverError::Setup(format!("opaque function `{name}` in the right-hand side")));
        }
        let dphi = expr.diff("phi");
        Ok(Rhs { expr, dphi })
    }

    /// `F ≡ 0`.
    pub fn zero() -> Self {
        Rhs { expr: Expr::zero(), dphi: Expr::zero() }
    }

    pub fn value(&self, phi: f64, y: f64, z: f64) -> Result<f64, EvalError> {
        eval_f64(&self.expr, &[("phi", phi), ("y", y), ("z", z)])
    }

    pub fn derivative(&self, phi: f64, y: f64, z: f64) -> Result<f64, EvalError> {
        eval_f64(&self.dphi, &[("phi", phi), ("y", y), ("z", z)])
    }

    /// Whether `F` depends on `y` or `z` explicitly.
    pub fn is_autonomous(&self) -> bool {
        let vars = self.expr.free_vars();
        !vars.contains("y") && !vars.contains("z")
    }
}

/// Wraps an expression in one variable as a callback. Evaluation failures
/// become NaN, which the solvers report as blow-up.
pub fn profile_from_expr(e: &Expr, var: &str) -> Result<Profile, SolverError> {
    if let Some(v) = e.free_vars().into_iter().find(|v| v != var) {
        return Err(SolverError::ForeignVariable(v));
    }
    let e = e.clone();
    let var = var.to_string();
    Ok(Arc::new(move |t| eval_f64(&e, &[(var.as_str(), t)]).unwrap_or(f64::NAN)))
}

/// Wraps an expression in `y, z` as a callback.
pub fn field_from_expr(e: &Expr) -> Result<Field, SolverError> {
    if let Some(v) = e.free_vars().into_iter().find(|v| v != "y" && v != "z") {
        return Err(SolverError::ForeignVariable(v));
    }
    let e = e.clone();
    Ok(Arc::new(move |y, z| eval_f64(&e, &[("y", y), ("z", z)]).unwrap_or(f64::NAN)))
}

/// Number of steps of size at most `h` covering `length`.
pub(crate) fn step_count(length: f64, h: f64) -> Result<usize, SolverError> {
    if !(h > 0.0) || !(length > 0.0) || !h.is_finite() || !length.is_finite() {
        return Err(SolverError::Setup(format!("bad interval length {length} or step {h}")));
    }
    let n = (length / h - 1e-9).ceil().max(1.0);
    if n > 1e8 {
        return Err(SolverError::Setup(format!("{n} steps requested")));
    }
    Ok(n as usize)
}
