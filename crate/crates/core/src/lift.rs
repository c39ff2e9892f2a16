//! Lifting reduced solutions back to four dimensions.
//!
//! `u(x) = φ(y(x), z(x))` is differentiated through the composition with
//! second-order jets, and `□u − F(u)` is measured at seeded sample points.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ansatz::{AnsatzSpec, ReducedEquation};
use crate::expr::eval::{eval_f64, eval_jet, eval_jet_composed};
use crate::expr::{EvalError, Expr, Jet2, COORDS};
use crate::minkowski::METRIC;
use crate::solvers::{ClosedFormSolution, GridSolution};

/// Default pass bound for grid-based residuals.
pub const GRID_TOL: f64 = 5e-2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiftError {
    #[error("variable `{0}` is not allowed in F")]
    ForeignVariable(String),
    #[error("{rejected} of {attempts} samples rejected; result undecided")]
    Undecided { used: usize, rejected: usize, attempts: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    pub mean: f64,
    pub worst_point: Option<BTreeMap<String, f64>>,
    pub samples_used: usize,
    pub samples_rejected: usize,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.samples_used > 0 && self.max < tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftConfig {
    pub samples: usize,
    pub seed: u64,
    /// Largest tolerated fraction of rejected draws.
    pub max_rejected: f64,
}

impl Default for LiftConfig {
    fn default() -> Self {
        LiftConfig { samples: 500, seed: 0x5eed, max_rejected: 0.1 }
    }
}

impl LiftConfig {
    pub fn with_samples(self, samples: usize) -> Self {
        LiftConfig { samples, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        LiftConfig { seed, ..self }
    }
}

/// `F` with `u` rewritten to `phi`; only `phi` may remain.
fn normalize_rhs(f: &Expr) -> Result<Expr, LiftError> {
    let f = f.subs("u", &Expr::var("phi"));
    match f.free_vars().into_iter().find(|v| v != "phi") {
        Some(v) => Err(LiftError::ForeignVariable(v)),
        None => Ok(f),
    }
}

fn eval_rhs(f: &Expr, phi: f64) -> Result<f64, EvalError> {
    eval_f64(f, &[("phi", phi)])
}

fn box_of(h: &Jet2) -> f64 {
    (0..4).map(|m| METRIC[m] * h.hess(m, m)).sum()
}

/// Jets of `y` and `z` in x0..x3 at `x`.
fn yz_jets(spec: &AnsatzSpec, x: &[f64]) -> Result<(Jet2, Jet2), EvalError> {
    let b = spec.domain.bind(x);
    Ok((
        eval_jet(&spec.y, &b, &COORDS, &spec.opaque)?,
        eval_jet(&spec.z, &b, &COORDS, &spec.opaque)?,
    ))
}

/// `□u − F(u)` at `x` for `u = φ(y(x), z(x))`, signed. Also returns
/// `(y, z)` at `x`.
pub fn lifted_residual_at(
    spec: &AnsatzSpec,
    phi: &Expr,
    f: &Expr,
    x: &[f64],
) -> Result<(f64, f64, f64), LiftError> {
    let f = normalize_rhs(f)?;
    let (jy, jz) = yz_jets(spec, x)?;
    let (y, z) = (jy.value(), jz.value());
    let binding = BTreeMap::from([("y".to_string(), jy), ("z".to_string(), jz)]);
    let u = eval_jet_composed(phi, &binding, 4, &BTreeMap::new())?;
    Ok((box_of(&u) - eval_rhs(&f, u.value())?, y, z))
}

/// `r φ_yy + 2q φ_yz + s φ_zz + R φ_y + S φ_z − F(φ)` at `(y, z)`, signed.
pub fn reduced_residual_at(eq: &ReducedEquation, phi: &Expr, y: f64, z: f64) -> Result<f64, LiftError> {
    let f = normalize_rhs(&eq.rhs)?;
    let b = BTreeMap::from([("y".to_string(), y), ("z".to_string(), z)]);
    let j = eval_jet(phi, &b, &["y", "z"], &BTreeMap::new())?;
    let c = |e: &Expr| eval_f64(e, &[("y", y), ("z", z)]);
    let k = &eq.coeffs;
    let lhs = c(&k.r)? * j.hess(0, 0)
        + 2.0 * c(&k.q)? * j.hess(0, 1)
        + c(&k.s)? * j.hess(1, 1)
        + c(&k.box_y)? * j.grad()[0]
        + c(&k.box_z)? * j.grad()[1];
    Ok(lhs - eval_rhs(&f, j.value())?)
}

enum Outcome {
    Rejected,
    Value(f64, Vec<f64>),
}

/// Draws points until `samples` evaluate or the rejection budget is spent.
fn sample_residuals(
    draw: impl Fn(&mut ChaCha8Rng) -> Vec<f64>,
    vars: &[String],
    cfg: LiftConfig,
    at: impl Fn(&[f64]) -> Option<f64> + Sync,
) -> Result<ResidualReport, LiftError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let budget = ((cfg.samples as f64) * cfg.max_rejected / (1.0 - cfg.max_rejected).max(1e-9)).floor() as usize;
    let (mut used, mut rejected) = (0usize, 0usize);
    let (mut max, mut sum) = (0.0f64, 0.0f64);
    let mut worst: Option<Vec<f64>> = None;
    while used < cfg.samples && rejected <= budget {
        let batch = cfg.samples - used;
        let points: Vec<Vec<f64>> = (0..batch).map(|_| draw(&mut rng)).collect();
        let outcomes: Vec<Outcome> = points
            .into_par_iter()
            .map(|p| match at(&p) {
                Some(v) if v.is_finite() => Outcome::Value(v.abs(), p),
                _ => Outcome::Rejected,
            })
            .collect();
        for o in outcomes {
            match o {
                Outcome::Rejected => rejected += 1,
                Outcome::Value(v, p) if used < cfg.samples => {
                    used += 1;
                    sum += v;
                    if worst.is_none() || v > max {
                        max = v;
                        worst = Some(p);
                    }
                }
                Outcome::Value(..) => {}
            }
        }
    }
    let attempts = used + rejected;
    if used == 0 || rejected as f64 > cfg.max_rejected * attempts as f64 {
        return Err(LiftError::Undecided { used, rejected, attempts });
    }
    Ok(ResidualReport {
        max,
        mean: sum / used as f64,
        worst_point: worst.map(|p| vars.iter().cloned().zip(p).collect()),
        samples_used: used,
        samples_rejected: rejected,
    })
}

/// `max/mean |□u − F(u)|` for a closed-form `φ` lifted through `spec`.
///
/// Samples outside the spec's domain, whose image leaves the solution's
/// validity box, or that hit a domain error are rejected.
pub fn lift_closed_form(
    spec: &AnsatzSpec,
    sol: &ClosedFormSolution,
    f: &Expr,
    cfg: LiftConfig,
) -> Result<ResidualReport, LiftError> {
    let f = normalize_rhs(f)?;
    let dom = &spec.domain;
    let at = |x: &[f64]| -> Option<f64> {
        if !dom.admits(x, &spec.opaque) {
            return None;
        }
        let (r, y, z) = lifted_residual_at(spec, &sol.expr, &f, x).ok()?;
        sol.is_valid_at(y, z).then_some(r)
    };
    sample_residuals(|rng| dom.sample(rng), &dom.vars, cfg, at)
}

/// Reduced residual statistics of `φ` over its own validity box.
pub fn reduced_residual(
    eq: &ReducedEquation,
    sol: &ClosedFormSolution,
    cfg: LiftConfig,
) -> Result<ResidualReport, LiftError> {
    normalize_rhs(&eq.rhs)?;
    let dom = &sol.validity;
    let at = |p: &[f64]| -> Option<f64> {
        if !sol.is_valid_at(p[0], p[1]) {
            return None;
        }
        reduced_residual_at(eq, &sol.expr, p[0], p[1]).ok()
    };
    sample_residuals(|rng| dom.sample(rng), &dom.vars, cfg, at)
}

/// 1D Lagrange weights on nodes `-1, 0, 1, 2` at offset `t`, with first
/// and second derivatives (in units of the node spacing).
fn lagrange4(t: f64) -> [[f64; 4]; 3] {
    let nodes = [-1.0, 0.0, 1.0, 2.0];
    let mut w = [[0.0; 4]; 3];
    for k in 0..4 {
        let others: Vec<f64> = (0..4).filter(|&m| m != k).map(|m| nodes[m]).collect();
        let denom: f64 = others.iter().map(|o| nodes[k] - o).product();
        let d: Vec<f64> = others.iter().map(|o| t - o).collect();
        w[0][k] = d[0] * d[1] * d[2] / denom;
        w[1][k] = (d[1] * d[2] + d[0] * d[2] + d[0] * d[1]) / denom;
        w[2][k] = 2.0 * (d[0] + d[1] + d[2]) / denom;
    }
    w
}

/// `φ, φ_y, φ_z, φ_yy, φ_yz, φ_zz` from bicubic interpolation, or `None`
/// when the 4×4 stencil leaves the grid.
pub fn interpolate(grid: &GridSolution, y: f64, z: f64) -> Option<[f64; 6]> {
    let (sy, sz) = ((y - grid.y0) / grid.hy, (z - grid.z0) / grid.hz);
    if !(sy.is_finite() && sz.is_finite()) {
        return None;
    }
    let (i, j) = (sy.floor(), sz.floor());
    if i < 1.0 || j < 1.0 || i + 2.0 > (grid.ny() - 1) as f64 || j + 2.0 > (grid.nz() - 1) as f64 {
        return None;
    }
    let (i, j) = (i as usize, j as usize);
    let (wy, wz) = (lagrange4(sy - i as f64), lagrange4(sz - j as f64));
    let mut out = [0.0; 6];
    // (derivative order in y, in z) for each output slot
    let orders = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
    for (slot, (dy, dz)) in orders.iter().enumerate() {
        let mut acc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                acc += wy[*dy][a] * wz[*dz][b] * grid.values[(i + a - 1, j + b - 1)];
            }
        }
        out[slot] = acc / grid.hy.powi(*dy as i32) / grid.hz.powi(*dz as i32);
    }
    Some(out)
}

/// Residual of the reduced equation for a grid `φ`, assembled with the
/// invariants of `spec` evaluated from jets at each sample `x`.
pub fn lift_grid(
    spec: &AnsatzSpec,
    grid: &GridSolution,
    f: &Expr,
    cfg: LiftConfig,
) -> Result<ResidualReport, LiftError> {
    let f = normalize_rhs(f)?;
    let dom = &spec.domain;
    let at = |x: &[f64]| -> Option<f64> {
        if !dom.admits(x, &spec.opaque) {
            return None;
        }
        let (jy, jz) = yz_jets(spec, x).ok()?;
        let d = interpolate(grid, jy.value(), jz.value())?;
        let m = |a: &[f64], b: &[f64]| (0..4).map(|k| METRIC[k] * a[k] * b[k]).sum::<f64>();
        let (gy, gz) = (jy.grad(), jz.grad());
        let lhs = m(gy, gy) * d[3] + 2.0 * m(gy, gz) * d[4] + m(gz, gz) * d[5] + box_of(&jy) * d[1] + box_of(&jz) * d[2];
        Some(lhs - eval_rhs(&f, d[0]).ok()?)
    };
    sample_residuals(|rng| dom.sample(rng), &dom.vars, cfg, at)
}
