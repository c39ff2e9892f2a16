//! Explicit leapfrog for `φ_yy − φ_zz = F` and its radial variant
//! `φ_yy − φ_zz − (2/z)φ_z = F`.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;

use super::closed_form::ClosedFormSolution;
use super::{step_count, Field, GridSolution, Profile, Rhs, SolverError, SolverMeta};
use crate::expr::eval::eval_jet;
use crate::expr::EvalError;

pub enum Boundary {
    Periodic,
    /// Values `g(y, z)` imposed at both ends of the z-interval.
    Dirichlet(Field),
}

/// `φ(0, z)` and `φ_y(0, z)`.
#[derive(Clone)]
pub struct InitialData {
    pub phi: Profile,
    pub dphi: Profile,
}

impl InitialData {
    pub fn new(phi: Profile, dphi: Profile) -> Self {
        InitialData { phi, dphi }
    }

    pub fn zero() -> Self {
        InitialData { phi: Arc::new(|_| 0.0), dphi: Arc::new(|_| 0.0) }
    }

    /// Data read off a closed-form solution at `y = 0`.
    pub fn from_closed_form(sol: &ClosedFormSolution) -> Self {
        let value = |k: usize| -> Profile {
            let e = sol.expr.clone();
            Arc::new(move |z| {
                let b = BTreeMap::from([("y".to_string(), 0.0), ("z".to_string(), z)]);
                match eval_jet(&e, &b, &["y"], &BTreeMap::new()) {
                    Ok(j) if k == 0 => j.value(),
                    Ok(j) => j.grad()[0],
                    Err(_) => f64::NAN,
                }
            })
        };
        InitialData { phi: value(0), dphi: value(1) }
    }
}

/// Problem data shared by both wave solvers. `y` runs over `[0, t_end]`.
pub struct WaveProblem {
    pub rhs: Rhs,
    pub init: InitialData,
    pub z_range: (f64, f64),
    pub t_end: f64,
    pub hy: f64,
    pub hz: f64,
    pub boundary: Boundary,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RadialScheme {
    /// Central differences on the equation as written.
    #[default]
    Direct,
    /// Solve for `ψ = zφ`, which obeys `ψ_yy − ψ_zz = z F(ψ/z)`.
    Substituted,
}

type Accel<'a> = dyn Fn(&[f64], usize, f64) -> Result<f64, EvalError> + 'a;

struct Layout {
    zs: Vec<f64>,
    hz: f64,
    hy: f64,
    ny: usize,
    periodic: bool,
}

fn layout(p: &WaveProblem) -> Result<Layout, SolverError> {
    let (z0, z1) = p.z_range;
    let periodic = matches!(p.boundary, Boundary::Periodic);
    let cells = step_count(z1 - z0, p.hz)?;
    let hz = (z1 - z0) / cells as f64;
    let nz = if periodic { cells } else { cells + 1 };
    if nz < 3 {
        return Err(SolverError::Setup("need at least three z nodes".into()));
    }
    let ny = step_count(p.t_end, p.hy)?;
    let hy = p.t_end / ny as f64;
    if hy > hz * (1.0 + 1e-12) {
        return Err(SolverError::Cfl { hy, hz });
    }
    let zs = (0..nz).map(|j| z0 + j as f64 * hz).collect();
    Ok(Layout { zs, hz, hy, ny, periodic })
}

/// Neighbours of node `j`, wrapping when periodic.
fn neighbours(layer: &[f64], j: usize, periodic: bool) -> (f64, f64) {
    let n = layer.len();
    if periodic {
        (layer[(j + n - 1) % n], layer[(j + 1) % n])
    } else {
        (layer[j - 1], layer[j + 1])
    }
}

fn evolve(
    lay: &Layout,
    phi0: Vec<f64>,
    dphi0: Vec<f64>,
    bc: Option<&dyn Fn(f64, f64) -> f64>,
    accel: &Accel<'_>,
) -> Result<Array2<f64>, SolverError> {
    let nz = lay.zs.len();
    let hy = lay.hy;
    let mut out = Array2::<f64>::zeros((lay.ny + 1, nz));
    let interior = |j: usize| lay.periodic || (j > 0 && j + 1 < nz);
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    if !finite(&phi0) || !finite(&dphi0) {
        return Err(SolverError::BlowUp { last_stable: 0 });
    }
    let mut prev = phi0;
    let mut cur = vec![0.0; nz];
    for j in 0..nz {
        cur[j] = if interior(j) {
            prev[j] + hy * dphi0[j] + 0.5 * hy * hy * accel(&prev, j, 0.0)?
        } else {
            bc.map(|g| g(hy, lay.zs[j])).unwrap()
        };
    }
    out.row_mut(0).assign(&ndarray::ArrayView1::from(&prev));
    if !finite(&cur) {
        return Err(SolverError::BlowUp { last_stable: 0 });
    }
    out.row_mut(1).assign(&ndarray::ArrayView1::from(&cur));
    let mut next = vec![0.0; nz];
    for n in 1..lay.ny {
        let y = n as f64 * hy;
        for j in 0..nz {
            next[j] = if interior(j) {
                2.0 * cur[j] - prev[j] + hy * hy * accel(&cur, j, y)?
            } else {
                bc.map(|g| g(y + hy, lay.zs[j])).unwrap()
            };
        }
        if !finite(&next) {
            return Err(SolverError::BlowUp { last_stable: n });
        }
        out.row_mut(n + 1).assign(&ndarray::ArrayView1::from(&next));
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(out)
}

/// Solves `φ_yy − φ_zz = F(φ)` for `y ∈ [0, t_end]`.
///
/// Steps are shrunk so that they divide the intervals exactly. The first
/// layer uses the Taylor step `φ + hy φ_y + hy²/2 (φ_zz + F)`.
pub fn solve_wave_1p1(p: &WaveProblem) -> Result<GridSolution, SolverError> {
    let lay = layout(p)?;
    let h2 = lay.hz * lay.hz;
    let rhs = &p.rhs;
    let zs = &lay.zs;
    let accel = |layer: &[f64], j: usize, y: f64| -> Result<f64, EvalError> {
        let (l, r) = neighbours(layer, j, lay.periodic);
        Ok((l - 2.0 * layer[j] + r) / h2 + rhs.value(layer[j], y, zs[j])?)
    };
    let phi0 = zs.iter().map(|z| (p.init.phi)(*z)).collect();
    let dphi0 = zs.iter().map(|z| (p.init.dphi)(*z)).collect();
    let bc: Option<&dyn Fn(f64, f64) -> f64> = match &p.boundary {
        Boundary::Periodic => None,
        Boundary::Dirichlet(g) => Some(g.as_ref()),
    };
    let values = evolve(&lay, phi0, dphi0, bc, &accel)?;
    let meta = SolverMeta {
        scheme: "leapfrog".into(),
        cfl: Some(lay.hy / lay.hz),
        iterations: Some(lay.ny),
        ..Default::default()
    };
    Ok(GridSolution::new(0.0, zs[0], lay.hy, lay.hz, values, meta))
}

/// Solves `φ_yy − φ_zz − (2/z)φ_z = F(φ)` on `z ∈ [z0, z1]` with `z0 > 0`.
/// Only Dirichlet boundaries are accepted.
pub fn solve_radial_wave(p: &WaveProblem, scheme: RadialScheme) -> Result<GridSolution, SolverError> {
    if !(p.z_range.0 > 0.0) {
        return Err(SolverError::Setup(format!("radial interval must start at z0 > 0, got {}", p.z_range.0)));
    }
    let Boundary::Dirichlet(g) = &p.boundary else {
        return Err(SolverError::Setup("the radial wave solver needs Dirichlet data".into()));
    };
    let lay = layout(p)?;
    let (hz, h2) = (lay.hz, lay.hz * lay.hz);
    let rhs = &p.rhs;
    let zs = &lay.zs;
    let phi0: Vec<f64> = zs.iter().map(|z| (p.init.phi)(*z)).collect();
    let dphi0: Vec<f64> = zs.iter().map(|z| (p.init.dphi)(*z)).collect();
    let (values, name) = match scheme {
        RadialScheme::Direct => {
            let accel = |layer: &[f64], j: usize, y: f64| -> Result<f64, EvalError> {
                let (l, r) = (layer[j - 1], layer[j + 1]);
                let lap = (l - 2.0 * layer[j] + r) / h2;
                let grad = (r - l) / (2.0 * hz);
                Ok(lap + 2.0 / zs[j] * grad + rhs.value(layer[j], y, zs[j])?)
            };
            (evolve(&lay, phi0, dphi0, Some(g.as_ref()), &accel)?, "leapfrog (radial, direct)")
        }
        RadialScheme::Substituted => {
            let accel = |layer: &[f64], j: usize, y: f64| -> Result<f64, EvalError> {
                let (l, r) = (layer[j - 1], layer[j + 1]);
                let z = zs[j];
                Ok((l - 2.0 * layer[j] + r) / h2 + z * rhs.value(layer[j] / z, y, z)?)
            };
            let psi0 = phi0.iter().zip(zs).map(|(v, z)| v * z).collect();
            let dpsi0 = dphi0.iter().zip(zs).map(|(v, z)| v * z).collect();
            let gz = |y: f64, z: f64| z * g(y, z);
            let mut psi = evolve(&lay, psi0, dpsi0, Some(&gz), &accel)?;
            for mut row in psi.rows_mut() {
                for (v, z) in row.iter_mut().zip(zs) {
                    *v /= z;
                }
            }
            (psi, "leapfrog (radial, psi = z*phi)")
        }
    };
    let meta = SolverMeta {
        scheme: name.into(),
        cfl: Some(lay.hy / lay.hz),
        iterations: Some(lay.ny),
        ..Default::default()
    };
    Ok(GridSolution::new(0.0, zs[0], lay.hy, lay.hz, values, meta))
}
