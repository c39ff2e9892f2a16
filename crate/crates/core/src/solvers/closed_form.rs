//! Closed-form solution families of the reduced hyperbolic equation.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::Field;
use crate::expr::eval::{eval_f64, eval_jet};
use crate::expr::{EvalError, Expr, Jet2, SamplingBox};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("kink speed must satisfy |c| < 1, got {0}")]
    Speed(f64),
    #[error("sign must be 1 or -1, got {0}")]
    Sign(i8),
    #[error("seed function may only use `t`, found `{0}`")]
    ForeignVariable(String),
    #[error("{condition} fails at y = {y}, z = {z}")]
    Domain { condition: &'static str, y: f64, z: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `φ(y, z)` as an expression, valid on `validity` (variables `y`, `z`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedFormSolution {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub expr: Expr,
    pub validity: SamplingBox,
}

impl ClosedFormSolution {
    pub fn new(name: impl Into<String>, expr: Expr, validity: SamplingBox) -> Self {
        ClosedFormSolution { name: name.into(), params: BTreeMap::new(), expr, validity }
    }

    pub fn value(&self, y: f64, z: f64) -> Result<f64, EvalError> {
        eval_f64(&self.expr, &[("y", y), ("z", z)])
    }

    /// Value, gradient and Hessian in `(y, z)`.
    pub fn jet(&self, y: f64, z: f64) -> Result<Jet2, EvalError> {
        let b = BTreeMap::from([("y".to_string(), y), ("z".to_string(), z)]);
        eval_jet(&self.expr, &b, &["y", "z"], &BTreeMap::new())
    }

    /// The solution as a callback; evaluation failures give NaN.
    pub fn field(&self) -> Field {
        let e = self.expr.clone();
        Arc::new(move |y, z| eval_f64(&e, &[("y", y), ("z", z)]).unwrap_or(f64::NAN))
    }

    pub fn is_valid_at(&self, y: f64, z: f64) -> bool {
        self.validity.admits(&[y, z], &BTreeMap::new())
    }
}

fn plane() -> SamplingBox {
    SamplingBox::cube(&["y", "z"], -100.0, 100.0)
}

/// `4·arctan(exp(±(y − c·z + shift)/√(1 − c²)))`, a travelling kink of
/// `φ_yy − φ_zz = sin φ`.
pub fn kink_solution(c: f64, sign: i8, shift: f64) -> Result<ClosedFormSolution, ClosedFormError> {
    if !(c.abs() < 1.0) {
        return Err(ClosedFormError::Speed(c));
    }
    if sign != 1 && sign != -1 {
        return Err(ClosedFormError::Sign(sign));
    }
    let gamma = 1.0 / (1.0 - c * c).sqrt();
    let phase = Expr::var("y") - Expr::float(c) * Expr::var("z") + Expr::float(shift);
    let expr = Expr::int(4) * (Expr::float(sign as f64 * gamma) * phase).exp().arctan();
    let mut sol = ClosedFormSolution::new("kink", expr, plane());
    sol.params = BTreeMap::from([("c".into(), c), ("sign".into(), sign as f64), ("shift".into(), shift)]);
    Ok(sol)
}

fn seed_in_t(e: &Expr) -> Result<(), ClosedFormError> {
    match e.free_vars().into_iter().find(|v| v != "t") {
        Some(v) => Err(ClosedFormError::ForeignVariable(v)),
        None => Ok(()),
    }
}

/// `ln(8 f′(ξ) g′(η) / (f(ξ) + g(η))²)` with `ξ = y + z`, `η = y − z`, a
/// solution of `φ_yy − φ_zz = exp φ`. `f` and `g` are expressions in `t`;
/// the monotonicity and non-vanishing conditions are sampled on `validity`.
pub fn liouville_solution(f: &Expr, g: &Expr, validity: SamplingBox) -> Result<ClosedFormSolution, ClosedFormError> {
    seed_in_t(f)?;
    seed_in_t(g)?;
    let xi = Expr::var("y") + Expr::var("z");
    let eta = Expr::var("y") - Expr::var("z");
    let (fx, gx) = (f.subs("t", &xi), g.subs("t", &eta));
    let (dfx, dgx) = (f.diff("t").subs("t", &xi), g.diff("t").subs("t", &eta));
    let checks = [(&dfx, "f' > 0"), (&dgx, "g' > 0")];
    let denom = fx.clone() + gx.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(0x11);
    // f + g must keep one sign on the (connected) box to stay away from zero
    let mut sign = 0.0;
    for _ in 0..200 {
        let p = validity.sample(&mut rng);
        if validity.is_excluded(&p, &BTreeMap::new()) {
            continue;
        }
        let at = [("y", p[0]), ("z", p[1])];
        for (e, condition) in checks {
            if !(eval_f64(e, &at)? > 0.0) {
                return Err(ClosedFormError::Domain { condition, y: p[0], z: p[1] });
            }
        }
        let d = eval_f64(&denom, &at)?;
        if !(d.abs() > 1e-12) || d.signum() * sign < 0.0 {
            return Err(ClosedFormError::Domain { condition: "f + g != 0", y: p[0], z: p[1] });
        }
        sign = d.signum();
    }
    let expr = (Expr::int(8) * dfx * dgx / denom.powi(2)).ln();
    Ok(ClosedFormSolution::new("liouville", expr, validity))
}

/// `g(z − y)/z`, an outgoing wave of `φ_yy − φ_zz − (2/z)φ_z = 0` for
/// `z > 0`. `g` is an expression in `t`.
pub fn spherical_wave(g: &Expr, z_min: f64) -> Result<ClosedFormSolution, ClosedFormError> {
    seed_in_t(g)?;
    let expr = g.subs("t", &(Expr::var("z") - Expr::var("y"))) / Expr::var("z");
    let validity = SamplingBox::new(&["y", "z"], &[-100.0, z_min], &[100.0, 100.0]);
    Ok(ClosedFormSolution::new("spherical-wave", expr, validity))
}
