//! Expression trees over coordinates, reduced-space variables and opaque
//! functions.
//!
//! Trees are immutable values. Rational constants stay exact through
//! differentiation and canonicalization; floats only appear where the input
//! carried them (numeric frames, decimal literals) or at evaluation time.
//! There is deliberately no general simplifier: [`Expr::canon`] performs a
//! small set of local rewrites (flattening, constant folding, sign
//! normalization) and identities are decided numerically by
//! [`identity::is_zero`].

mod canon;
mod diff;
pub mod eval;
pub mod identity;
pub mod jet;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use eval::{Builtin, EvalError, OpaqueFn, OpaqueImpls};
pub use identity::{is_zero, Exclusion, SamplingBox, Verdict, ZeroTest, DEFAULT_ATOL, DEFAULT_TUBE};
pub use jet::Jet2;
pub use parse::{parse, ParseError, ParseErrorKind};

/// Coordinate names of Minkowski space, in index order.
pub const COORDS: [&str; 4] = ["x0", "x1", "x2", "x3"];

/// A numeric literal: exact rational, or a float that entered from outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Number {
    Rational(Rational64),
    Float(f64),
}

impl Number {
    pub fn int(n: i64) -> Self {
        Number::Rational(Rational64::from_integer(n))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Number::Float(f) => f,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Float(f) => f == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Number::Rational(r) => r.is_one(),
            Number::Float(f) => f == 1.0,
        }
    }

    pub fn is_minus_one(self) -> bool {
        match self {
            Number::Rational(r) => r == -Rational64::one(),
            Number::Float(f) => f == -1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Float(f) => f < 0.0,
        }
    }

    pub fn abs(self) -> Self {
        match self {
            Number::Rational(r) => Number::Rational(r.abs()),
            Number::Float(f) => Number::Float(f.abs()),
        }
    }

    pub fn neg(self) -> Self {
        match self {
            Number::Rational(r) => Number::Rational(-r),
            Number::Float(f) => Number::Float(-f),
        }
    }

    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => match a.checked_add(&b) {
                Some(c) => Number::Rational(c),
                None => Number::Float(self.to_f64() + other.to_f64()),
            },
            _ => Number::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(self, other: Self) -> Self {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => match a.checked_mul(&b) {
                Some(c) => Number::Rational(c),
                None => Number::Float(self.to_f64() * other.to_f64()),
            },
            _ => Number::Float(self.to_f64() * other.to_f64()),
        }
    }

    /// `None` on division by an exact zero.
    pub fn div(self, other: Self) -> Option<Self> {
        match (self, other) {
            (_, Number::Rational(b)) if b.is_zero() => None,
            (Number::Rational(a), Number::Rational(b)) => {
                // Ratio's checked_div is not overflow-safe for i64 extremes; go via recip.
                match a.checked_mul(&b.recip()) {
                    Some(c) => Some(Number::Rational(c)),
                    None => Some(Number::Float(a.to_f64()? / b.to_f64()?)),
                }
            }
            _ => {
                let d = other.to_f64();
                if d == 0.0 {
                    None
                } else {
                    Some(Number::Float(self.to_f64() / d))
                }
            }
        }
    }
}

/// Elementary functions available by name in the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Arctan,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Ln, Func::Sqrt, Func::Arctan];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Arctan => "arctan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree.
///
/// `Opaque` stands for an arbitrary user function such as the `Phi` in
/// `x2 + Phi(x0 + x3)`; `order` counts how many times it has been
/// differentiated, so `Phi''(t)` is `Opaque { name: "Phi", arg: t, order: 2 }`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Number),
    Var(String),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, Rational64),
    Neg(Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>),
    Opaque { name: String, arg: Box<Expr>, order: u32 },
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Number::int(0))
    }

    pub fn one() -> Expr {
        Expr::Const(Number::int(1))
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Number::int(n))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::Const(Number::Rational(Rational64::new(num, den)))
    }

    /// A float constant; integral values are stored exactly.
    pub fn float(f: f64) -> Expr {
        if f.fract() == 0.0 && f.abs() < 1e15 {
            Expr::int(f as i64)
        } else {
            Expr::Const(Number::Float(f))
        }
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn opaque(name: impl Into<String>, arg: Expr) -> Expr {
        Expr::Opaque { name: name.into(), arg: Box::new(arg), order: 0 }
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        Expr::Func(f, Box::new(arg)).canon_node()
    }

    pub fn sin(self) -> Expr {
        Expr::func(Func::Sin, self)
    }
    pub fn cos(self) -> Expr {
        Expr::func(Func::Cos, self)
    }
    pub fn exp(self) -> Expr {
        Expr::func(Func::Exp, self)
    }
    pub fn ln(self) -> Expr {
        Expr::func(Func::Ln, self)
    }
    pub fn sqrt(self) -> Expr {
        Expr::func(Func::Sqrt, self)
    }
    pub fn arctan(self) -> Expr {
        Expr::func(Func::Arctan, self)
    }

    pub fn powi(self, p: i64) -> Expr {
        Expr::Pow(Box::new(self), Rational64::from_integer(p)).canon_node()
    }

    pub fn pow(self, p: Rational64) -> Expr {
        Expr::Pow(Box::new(self), p).canon_node()
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        Expr::Sum(terms.into_iter().collect()).canon_node()
    }

    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        Expr::Product(factors.into_iter().collect()).canon_node()
    }

    pub fn as_number(&self) -> Option<Number> {
        match self {
            Expr::Const(n) => Some(*n),
            _ => None,
        }
    }

    /// True only for the literal constant zero.
    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expr::Const(n) if n.is_zero())
    }

    /// Free variables, excluding opaque function names.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                out.insert(v.clone());
            }
        });
        out
    }

    pub fn opaque_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Opaque { name, .. } = e {
                out.insert(name.clone());
            }
        });
        out
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().for_each(|x| x.visit(f)),
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Func(_, b) => b.visit(f),
            Expr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Opaque { arg, .. } => arg.visit(f),
        }
    }

    /// Rebuilds the tree bottom-up, applying `f` to every node after its
    /// children have been rebuilt. The result is canonicalized node by node.
    fn rebuild(&self, f: &impl Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(e) = f(self) {
            return e;
        }
        let node = match self {
            Expr::Const(_) | Expr::Var(_) => return self.clone(),
            Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| x.rebuild(f)).collect()),
            Expr::Product(xs) => Expr::Product(xs.iter().map(|x| x.rebuild(f)).collect()),
            Expr::Pow(b, p) => Expr::Pow(Box::new(b.rebuild(f)), *p),
            Expr::Neg(b) => Expr::Neg(Box::new(b.rebuild(f))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.rebuild(f)), Box::new(b.rebuild(f))),
            Expr::Func(g, b) => Expr::Func(*g, Box::new(b.rebuild(f))),
            Expr::Opaque { name, arg, order } => {
                Expr::Opaque { name: name.clone(), arg: Box::new(arg.rebuild(f)), order: *order }
            }
        };
        node.canon_node()
    }

    /// Simultaneous substitution of variables by expressions.
    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        self.rebuild(&|e| match e {
            Expr::Var(v) => map.get(v).cloned(),
            _ => None,
        })
    }

    pub fn subs(&self, var: &str, value: &Expr) -> Expr {
        let mut map = BTreeMap::new();
        map.insert(var.to_string(), value.clone());
        self.substitute(&map)
    }

    /// Replaces every occurrence of the opaque function `name` (and its
    /// derivatives) by `body`, an expression in `param`.
    pub fn inline_opaque(&self, name: &str, param: &str, body: &Expr) -> Expr {
        self.rebuild(&|e| match e {
            Expr::Opaque { name: n, arg, order } if n == name => {
                let mut d = body.clone();
                for _ in 0..*order {
                    d = d.diff(param);
                }
                let inner = arg.inline_opaque(name, param, body);
                Some(d.subs(param, &inner))
            }
            _ => None,
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(self, f)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, rhs]).canon_node()
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![self, -rhs]).canon_node()
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Product(vec![self, rhs]).canon_node()
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs)).canon_node()
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self)).canon_node()
    }
}
