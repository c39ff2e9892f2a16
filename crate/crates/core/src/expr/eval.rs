//! Numeric evaluation of expression trees, either to plain `f64` values or
//! to second-order jets.
//!
//! Both paths share one generic walker, so a tree evaluated twice at the
//! same bindings gives bit-identical results, and the jet value always
//! equals the plain value.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Expr, Func, Jet2};

/// Concrete implementation of an opaque function: `derivative(k, t)` is the
/// `k`-th derivative at `t`.
pub trait OpaqueFn: Send + Sync + fmt::Debug {
    fn derivative(&self, k: u32, t: f64) -> f64;
}

pub type OpaqueImpls = BTreeMap<String, Arc<dyn OpaqueFn>>;

/// The built-in battery of smooth functions that can back an opaque slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    /// t²
    Square,
    /// sin t
    Sin,
    /// eᵗ
    Exp,
    /// t³ − t
    Cubic,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::Square, Builtin::Sin, Builtin::Exp, Builtin::Cubic];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Square => "square",
            Builtin::Sin => "sin",
            Builtin::Exp => "exp",
            Builtin::Cubic => "cubic",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    /// The same function as an expression in `param`.
    pub fn body(self, param: &str) -> Expr {
        let t = Expr::var(param);
        match self {
            Builtin::Square => t.powi(2),
            Builtin::Sin => t.sin(),
            Builtin::Exp => t.exp(),
            Builtin::Cubic => t.clone().powi(3) - t,
        }
    }

    pub fn into_impl(self) -> Arc<dyn OpaqueFn> {
        Arc::new(self)
    }
}

impl OpaqueFn for Builtin {
    fn derivative(&self, k: u32, t: f64) -> f64 {
        match self {
            Builtin::Square => match k {
                0 => t * t,
                1 => 2.0 * t,
                2 => 2.0,
                _ => 0.0,
            },
            Builtin::Sin => match k % 4 {
                0 => t.sin(),
                1 => t.cos(),
                2 => -t.sin(),
                _ => -t.cos(),
            },
            Builtin::Exp => t.exp(),
            Builtin::Cubic => match k {
                0 => t * t * t - t,
                1 => 3.0 * t * t - 1.0,
                2 => 6.0 * t,
                3 => 6.0,
                _ => 0.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("no implementation supplied for opaque function `{0}`")]
    MissingOpaque(String),
    #[error("domain error in {op} at {value}: `{subtree}`")]
    Domain { op: &'static str, subtree: String, value: f64 },
    #[error("non-finite value from `{subtree}`")]
    NonFinite { subtree: String },
}

impl EvalError {
    pub fn is_domain(&self) -> bool {
        matches!(self, EvalError::Domain { .. } | EvalError::NonFinite { .. })
    }
}

fn subtree_text(e: &Expr) -> String {
    let mut s = e.to_string();
    if s.len() > 160 {
        let mut cut = 157;
        while !s.is_char_boundary(cut) {
            cut -= 1;
        }
        s.truncate(cut);
        s.push_str("...");
    }
    s
}

pub(crate) fn apply_func(f: Func, x: f64) -> f64 {
    match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Exp => x.exp(),
        Func::Ln => x.ln(),
        Func::Sqrt => x.sqrt(),
        Func::Arctan => x.atan(),
    }
}

/// Number types the evaluator can produce.
pub trait Scalar: Clone {
    fn lift(&self, c: f64) -> Self;
    fn val(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Whether derivative information must be propagated through this value.
    fn carries_derivatives(&self) -> bool;
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;
    fn all_finite(&self) -> bool;
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn val(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn carries_derivatives(&self) -> bool {
        false
    }
    fn chain(&self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Jet2 {
    fn lift(&self, c: f64) -> Self {
        Jet2::constant(c, self.dim())
    }
    fn val(&self) -> f64 {
        self.value()
    }
    fn add(&self, o: &Self) -> Self {
        Jet2::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Jet2::mul(self, o)
    }
    fn neg(&self) -> Self {
        Jet2::neg(self)
    }
    fn carries_derivatives(&self) -> bool {
        !self.is_constant()
    }
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        Jet2::chain(self, f0, f1, f2)
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// k-th derivative coefficient of a^p: p(p-1)...(p-k+1) a^(p-k).
fn int_pow_derivative(a: f64, p: i64, k: i64) -> f64 {
    let falling: f64 = (0..k).map(|i| (p - i) as f64).product();
    if falling == 0.0 {
        0.0
    } else {
        falling * a.powi((p - k) as i32)
    }
}

struct Walker<'a, T> {
    lookup: &'a dyn Fn(&str) -> Option<T>,
    impls: &'a OpaqueImpls,
    template: T,
    scale: f64,
}

impl<T: Scalar> Walker<'_, T> {
    fn domain(op: &'static str, e: &Expr, value: f64) -> EvalError {
        EvalError::Domain { op, subtree: subtree_text(e), value }
    }

    fn eval(&mut self, e: &Expr) -> Result<T, EvalError> {
        let out = match e {
            Expr::Const(n) => self.template.lift(n.to_f64()),
            Expr::Var(v) => {
                (self.lookup)(v).ok_or_else(|| EvalError::UnboundVariable(v.clone()))?
            }
            Expr::Sum(terms) => {
                let mut acc = self.eval(&terms[0])?;
                for t in &terms[1..] {
                    acc = acc.add(&self.eval(t)?);
                }
                acc
            }
            Expr::Product(factors) => {
                let mut acc = self.eval(&factors[0])?;
                for f in &factors[1..] {
                    acc = acc.mul(&self.eval(f)?);
                }
                acc
            }
            Expr::Neg(inner) => self.eval(inner)?.neg(),
            Expr::Div(a, b) => {
                let num = self.eval(a)?;
                let den = self.eval(b)?;
                let d = den.val();
                if d == 0.0 {
                    return Err(Self::domain("division", e, d));
                }
                let inv = den.chain(1.0 / d, -1.0 / (d * d), 2.0 / (d * d * d));
                num.mul(&inv)
            }
            Expr::Pow(base, p) => {
                let b = self.eval(base)?;
                let a = b.val();
                if p.is_integer() {
                    let n = p.to_integer();
                    if a == 0.0 && n < 0 {
                        return Err(Self::domain("power", e, a));
                    }
                    b.chain(
                        a.powi(n as i32),
                        int_pow_derivative(a, n, 1),
                        int_pow_derivative(a, n, 2),
                    )
                } else {
                    let pf = p.to_f64().unwrap_or(f64::NAN);
                    if a < 0.0 || (a == 0.0 && (pf < 0.0 || (b.carries_derivatives() && pf < 2.0))) {
                        return Err(Self::domain("power", e, a));
                    }
                    b.chain(
                        a.powf(pf),
                        pf * a.powf(pf - 1.0),
                        pf * (pf - 1.0) * a.powf(pf - 2.0),
                    )
                }
            }
            Expr::Func(f, arg) => {
                let x = self.eval(arg)?;
                let a = x.val();
                let (f0, f1, f2) = match f {
                    Func::Sin => (a.sin(), a.cos(), -a.sin()),
                    Func::Cos => (a.cos(), -a.sin(), -a.cos()),
                    Func::Exp => {
                        let v = a.exp();
                        (v, v, v)
                    }
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(Self::domain("ln", e, a));
                        }
                        (a.ln(), 1.0 / a, -1.0 / (a * a))
                    }
                    Func::Sqrt => {
                        if a < 0.0 || (a == 0.0 && x.carries_derivatives()) {
                            return Err(Self::domain("sqrt", e, a));
                        }
                        let r = a.sqrt();
                        (r, 0.5 / r, -0.25 / (r * a))
                    }
                    Func::Arctan => {
                        let d = 1.0 + a * a;
                        (a.atan(), 1.0 / d, -2.0 * a / (d * d))
                    }
                };
                if x.carries_derivatives() {
                    x.chain(f0, f1, f2)
                } else {
                    x.lift(f0)
                }
            }
            Expr::Opaque { name, arg, order } => {
                let imp = self
                    .impls
                    .get(name)
                    .ok_or_else(|| EvalError::MissingOpaque(name.clone()))?;
                let x = self.eval(arg)?;
                let t = x.val();
                let f0 = imp.derivative(*order, t);
                if x.carries_derivatives() {
                    x.chain(f0, imp.derivative(order + 1, t), imp.derivative(order + 2, t))
                } else {
                    x.lift(f0)
                }
            }
        };
        if !out.all_finite() {
            return Err(EvalError::NonFinite { subtree: subtree_text(e) });
        }
        let v = out.val().abs();
        if v > self.scale {
            self.scale = v;
        }
        Ok(out)
    }
}

fn walk<T: Scalar>(
    e: &Expr,
    lookup: &dyn Fn(&str) -> Option<T>,
    impls: &OpaqueImpls,
    template: T,
) -> Result<(T, f64), EvalError> {
    let mut w = Walker { lookup, impls, template, scale: 0.0 };
    let v = w.eval(e)?;
    Ok((v, w.scale))
}

fn empty_impls() -> &'static OpaqueImpls {
    static EMPTY: std::sync::OnceLock<OpaqueImpls> = std::sync::OnceLock::new();
    EMPTY.get_or_init(BTreeMap::new)
}

/// Convenience evaluation for expressions without opaque functions.
pub fn eval_f64(e: &Expr, binding: &[(&str, f64)]) -> Result<f64, EvalError> {
    let lookup = |name: &str| binding.iter().find(|(n, _)| *n == name).map(|(_, v)| *v);
    walk(e, &lookup, empty_impls(), 0.0).map(|(v, _)| v)
}

pub fn eval(e: &Expr, binding: &BTreeMap<String, f64>, impls: &OpaqueImpls) -> Result<f64, EvalError> {
    eval_scaled(e, binding, impls).map(|(v, _)| v)
}

/// Value together with the largest magnitude of any subterm, the reference
/// scale for relative zero tests.
pub fn eval_scaled(
    e: &Expr,
    binding: &BTreeMap<String, f64>,
    impls: &OpaqueImpls,
) -> Result<(f64, f64), EvalError> {
    let lookup = |name: &str| binding.get(name).copied();
    walk(e, &lookup, impls, 0.0)
}

/// Evaluates `e` as a second-order jet in the `active` variables. Bound
/// variables that are not active enter as constants.
pub fn eval_jet(
    e: &Expr,
    binding: &BTreeMap<String, f64>,
    active: &[&str],
    impls: &OpaqueImpls,
) -> Result<Jet2, EvalError> {
    let n = active.len();
    let lookup = |name: &str| {
        let v = *binding.get(name)?;
        Some(match active.iter().position(|a| *a == name) {
            Some(k) => Jet2::variable(v, k, n),
            None => Jet2::constant(v, n),
        })
    };
    walk(e, &lookup, impls, Jet2::constant(0.0, n)).map(|(j, _)| j)
}

/// Evaluates `e` with variables bound to jets, which composes derivatives:
/// binding `y` and `z` to jets in x0..x3 yields the jet of `e(y(x), z(x))`.
/// All jets must share the dimension `n`.
pub fn eval_jet_composed(
    e: &Expr,
    binding: &BTreeMap<String, Jet2>,
    n: usize,
    impls: &OpaqueImpls,
) -> Result<Jet2, EvalError> {
    let lookup = |name: &str| binding.get(name).cloned();
    walk(e, &lookup, impls, Jet2::constant(0.0, n)).map(|(j, _)| j)
}
