//! Numeric test that an x-space expression is a function of `(y, z)` only.
//!
//! For a random point `x` we look for a second point `x'` on the same level
//! set `y(x') = y(x)`, `z(x') = z(x)` by perturbing `x` in a random direction
//! and projecting back with minimum-norm Gauss–Newton steps. An expression
//! that depends only on `(y, z)` must agree at both points.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{AnsatzError, AnsatzSpec};
use crate::expr::eval::{eval, eval_jet};
use crate::expr::{Expr, COORDS};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSetTest {
    /// Number of level-set pairs to compare.
    pub pairs: usize,
    pub seed: u64,
    /// Relative agreement required between the two values of a pair.
    pub tol: f64,
    /// Perturbation radius before projection, as a fraction of the box width.
    pub step: f64,
}

impl Default for LevelSetTest {
    fn default() -> Self {
        LevelSetTest { pairs: 50, seed: 0x5eed, tol: 1e-7, step: 0.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Dependence {
    /// Every sampled pair agreed.
    #[serde(rename = "only_yz")]
    OnlyYZ { pairs: usize },
    /// Two points with equal `(y, z)` but different values.
    Witness {
        first: BTreeMap<String, f64>,
        second: BTreeMap<String, f64>,
        values: (f64, f64),
    },
    Undecided { found: usize, reason: String },
}

impl Dependence {
    pub fn holds(&self) -> bool {
        matches!(self, Dependence::OnlyYZ { .. })
    }
}

enum PairOutcome {
    Failed,
    Agree,
    Differ(Vec<f64>, Vec<f64>, f64, f64),
}

/// Projects `start` onto `{y = target.0, z = target.1}`.
fn project(spec: &AnsatzSpec, start: &[f64], target: (f64, f64)) -> Option<Vec<f64>> {
    let mut x = start.to_vec();
    let scale = 1.0f64.max(target.0.abs()).max(target.1.abs());
    for _ in 0..60 {
        let b = spec.domain.bind(&x);
        let jy = eval_jet(&spec.y, &b, &COORDS, &spec.opaque).ok()?;
        let jz = eval_jet(&spec.z, &b, &COORDS, &spec.opaque).ok()?;
        let g = (jy.value() - target.0, jz.value() - target.1);
        if g.0.abs().max(g.1.abs()) <= 1e-13 * scale {
            return Some(x);
        }
        let (u, v) = (jy.grad(), jz.grad());
        let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(p, q)| p * q).sum::<f64>();
        let (a11, a12, a22) = (dot(u, u), dot(u, v), dot(v, v));
        let det = a11 * a22 - a12 * a12;
        if !(det.abs() > 1e-14 * (a11 * a22).max(1e-300)) {
            return None;
        }
        let l1 = (a22 * g.0 - a12 * g.1) / det;
        let l2 = (a11 * g.1 - a12 * g.0) / det;
        for k in 0..4 {
            x[k] -= l1 * u[k] + l2 * v[k];
        }
        if !x.iter().all(|c| c.is_finite()) {
            return None;
        }
    }
    None
}

fn try_pair(spec: &AnsatzSpec, e: &Expr, x: &[f64], dir: &[f64], cfg: &LevelSetTest) -> PairOutcome {
    let dom = &spec.domain;
    if !dom.admits(x, &spec.opaque) {
        return PairOutcome::Failed;
    }
    let b = dom.bind(x);
    let (Ok(y0), Ok(z0), Ok(e0)) =
        (eval(&spec.y, &b, &spec.opaque), eval(&spec.z, &b, &spec.opaque), eval(e, &b, &spec.opaque))
    else {
        return PairOutcome::Failed;
    };
    let start: Vec<f64> = (0..4)
        .map(|k| x[k] + cfg.step * (dom.max[k] - dom.min[k]) * dir[k])
        .collect();
    let Some(x2) = project(spec, &start, (y0, z0)) else {
        return PairOutcome::Failed;
    };
    let dist: f64 = x.iter().zip(&x2).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
    if dist < 1e-3 || !dom.admits(&x2, &spec.opaque) {
        return PairOutcome::Failed;
    }
    let Ok(e1) = eval(e, &dom.bind(&x2), &spec.opaque) else {
        return PairOutcome::Failed;
    };
    if (e0 - e1).abs() <= cfg.tol * 1f64.max(e0.abs()).max(e1.abs()) {
        PairOutcome::Agree
    } else {
        PairOutcome::Differ(x.to_vec(), x2, e0, e1)
    }
}

/// Tests whether `e` (an expression in x0..x3) is constant on the level sets
/// of `(y, z)`.
pub fn depends_only_on_yz(
    e: &Expr,
    spec: &AnsatzSpec,
    cfg: LevelSetTest,
) -> Result<Dependence, AnsatzError> {
    spec.validate()?;
    if let Some(var) = e.free_vars().into_iter().find(|v| !COORDS.contains(&v.as_str())) {
        return Err(AnsatzError::ForeignVariable { var, place: "a level-set test expression" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let max_attempts = cfg.pairs.saturating_mul(10);
    let (mut found, mut attempts) = (0usize, 0usize);
    while found < cfg.pairs && attempts < max_attempts {
        let batch = (cfg.pairs - found).min(max_attempts - attempts);
        attempts += batch;
        let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..batch)
            .map(|_| {
                let x = spec.domain.sample(&mut rng);
                let d: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (x, d)
            })
            .collect();
        let outcomes: Vec<PairOutcome> =
            draws.par_iter().map(|(x, d)| try_pair(spec, e, x, d, &cfg)).collect();
        for o in outcomes {
            match o {
                PairOutcome::Failed => {}
                PairOutcome::Agree => found += 1,
                PairOutcome::Differ(a, b, va, vb) => {
                    return Ok(Dependence::Witness {
                        first: spec.domain.bind(&a),
                        second: spec.domain.bind(&b),
                        values: (va, vb),
                    });
                }
            }
        }
    }
    if found < cfg.pairs {
        return Ok(Dependence::Undecided {
            found,
            reason: format!("only {found} of {} level-set pairs could be constructed", cfg.pairs),
        });
    }
    Ok(Dependence::OnlyYZ { pairs: found })
}
