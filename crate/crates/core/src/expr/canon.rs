//! Local rewrites that give every tree a canonical shape.
//!
//! Rules, applied bottom-up:
//! - sums and products are flattened, constants folded (sum constant last,
//!   product constant first), zeros and units dropped;
//! - negations are pulled out of products, `-(-e)` collapses, and a product
//!   with constant `-1` becomes `Neg(product)`;
//! - integer powers of the same base inside a product merge;
//! - trivial powers, divisions by constants and elementary functions of
//!   exact special values fold.

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use super::{Expr, Func, Number};

impl Expr {
    /// Full canonicalization. Idempotent.
    pub fn canon(&self) -> Expr {
        let node = match self {
            Expr::Const(_) | Expr::Var(_) => return self.clone(),
            Expr::Sum(xs) => Expr::Sum(xs.iter().map(Expr::canon).collect()),
            Expr::Product(xs) => Expr::Product(xs.iter().map(Expr::canon).collect()),
            Expr::Pow(b, p) => Expr::Pow(Box::new(b.canon()), *p),
            Expr::Neg(b) => Expr::Neg(Box::new(b.canon())),
            Expr::Div(a, b) => Expr::Div(Box::new(a.canon()), Box::new(b.canon())),
            Expr::Func(f, b) => Expr::Func(*f, Box::new(b.canon())),
            Expr::Opaque { name, arg, order } => {
                Expr::Opaque { name: name.clone(), arg: Box::new(arg.canon()), order: *order }
            }
        };
        node.canon_node()
    }

    /// Canonicalizes the root node assuming its children are canonical.
    pub(crate) fn canon_node(self) -> Expr {
        match self {
            Expr::Sum(terms) => canon_sum(terms),
            Expr::Product(factors) => canon_product(factors),
            Expr::Neg(inner) => canon_neg(*inner),
            Expr::Pow(base, p) => canon_pow(*base, p),
            Expr::Div(a, b) => canon_div(*a, *b),
            Expr::Func(f, arg) => canon_func(f, *arg),
            other => other,
        }
    }
}

fn canon_sum(terms: Vec<Expr>) -> Expr {
    let mut constant = Number::int(0);
    let mut out = Vec::with_capacity(terms.len());
    let mut stack: Vec<Expr> = terms.into_iter().rev().collect();
    while let Some(t) = stack.pop() {
        match t {
            Expr::Sum(inner) => stack.extend(inner.into_iter().rev()),
            Expr::Const(c) => constant = constant.add(c),
            other => out.push(other),
        }
    }
    if !constant.is_zero() {
        out.push(Expr::Const(constant));
    }
    match out.len() {
        0 => Expr::Const(constant),
        1 => out.pop().unwrap(),
        _ => Expr::Sum(out),
    }
}

fn canon_product(factors: Vec<Expr>) -> Expr {
    let mut constant = Number::int(1);
    let mut out = Vec::with_capacity(factors.len());
    let mut stack: Vec<Expr> = factors.into_iter().rev().collect();
    while let Some(f) = stack.pop() {
        match f {
            Expr::Product(inner) => stack.extend(inner.into_iter().rev()),
            Expr::Neg(inner) => {
                constant = constant.neg();
                stack.push(*inner);
            }
            Expr::Const(c) => constant = constant.mul(c),
            other => out.push(other),
        }
    }
    if constant.is_zero() {
        return Expr::Const(constant);
    }
    if out.is_empty() {
        return Expr::Const(constant);
    }
    if let Some(merged) = merge_powers(&out) {
        return canon_product(std::iter::once(Expr::Const(constant)).chain(merged).collect());
    }
    let rest = if out.len() == 1 { out.pop().unwrap() } else { Expr::Product(out) };
    if constant.is_one() {
        rest
    } else if constant.is_minus_one() {
        Expr::Neg(Box::new(rest))
    } else {
        match rest {
            Expr::Product(mut xs) => {
                xs.insert(0, Expr::Const(constant));
                Expr::Product(xs)
            }
            single => Expr::Product(vec![Expr::Const(constant), single]),
        }
    }
}

fn split_power(e: &Expr) -> (&Expr, Rational64) {
    match e {
        Expr::Pow(b, p) if p.is_integer() => (b, *p),
        other => (other, Rational64::one()),
    }
}

/// Collects integer powers of equal bases; `None` when nothing repeats.
fn merge_powers(factors: &[Expr]) -> Option<Vec<Expr>> {
    let mut groups: Vec<(&Expr, Rational64)> = Vec::new();
    for f in factors {
        let (base, p) = split_power(f);
        match groups.iter_mut().find(|(b, _)| *b == base) {
            Some(g) => g.1 += p,
            None => groups.push((base, p)),
        }
    }
    if groups.len() == factors.len() {
        return None;
    }
    Some(groups.into_iter().map(|(b, p)| canon_pow(b.clone(), p)).collect())
}

fn canon_neg(inner: Expr) -> Expr {
    match inner {
        Expr::Const(c) => Expr::Const(c.neg()),
        Expr::Neg(e) => *e,
        Expr::Product(xs) if matches!(xs.first(), Some(Expr::Const(_))) => {
            canon_product(std::iter::once(Expr::int(-1)).chain(xs).collect())
        }
        other => Expr::Neg(Box::new(other)),
    }
}

fn canon_pow(base: Expr, p: Rational64) -> Expr {
    if p.is_zero() {
        return Expr::one();
    }
    if p.is_one() {
        return base;
    }
    match base {
        Expr::Const(Number::Rational(r)) => {
            if r.is_one() || (r.is_zero() && p.is_positive()) {
                return Expr::Const(Number::Rational(r));
            }
            if p.is_integer() && !r.is_zero() {
                if let Some(v) = rational_powi(r, *p.numer()) {
                    return Expr::Const(Number::Rational(v));
                }
            }
            if *p.denom() == 2 && !r.is_negative() {
                if let Some(root) = rational_sqrt(r) {
                    return canon_pow(Expr::Const(Number::Rational(root)), p * 2);
                }
            }
            Expr::Pow(Box::new(Expr::Const(Number::Rational(r))), p)
        }
        Expr::Pow(inner, q) if p.is_integer() => canon_pow(*inner, p * q),
        Expr::Neg(inner) if p.is_integer() => {
            let pw = canon_pow(*inner, p);
            if p.numer() % 2 == 0 {
                pw
            } else {
                canon_neg(pw)
            }
        }
        other => Expr::Pow(Box::new(other), p),
    }
}

fn rational_powi(r: Rational64, n: i64) -> Option<Rational64> {
    if n.unsigned_abs() > 64 {
        return None;
    }
    let base = if n < 0 { r.recip() } else { r };
    let mut acc = Rational64::one();
    for _ in 0..n.unsigned_abs() {
        acc = num_traits::CheckedMul::checked_mul(&acc, &base)?;
    }
    Some(acc)
}

fn isqrt(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let s = (n as f64).sqrt().round() as i64;
    (s.checked_mul(s)? == n).then_some(s)
}

fn rational_sqrt(r: Rational64) -> Option<Rational64> {
    Some(Rational64::new(isqrt(*r.numer())?, isqrt(*r.denom())?))
}

fn canon_div(a: Expr, b: Expr) -> Expr {
    if let Expr::Const(d) = &b {
        if d.is_one() {
            return a;
        }
        if let (Expr::Const(n), false) = (&a, d.is_zero()) {
            if let Some(q) = n.div(*d) {
                return Expr::Const(q);
            }
        }
        if let Some(inv) = Number::int(1).div(*d) {
            return canon_product(vec![Expr::Const(inv), a]);
        }
    }
    if a.is_literal_zero() {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

fn canon_func(f: Func, arg: Expr) -> Expr {
    match arg {
        Expr::Const(Number::Rational(r)) => {
            let folded = match f {
                Func::Sin | Func::Arctan if r.is_zero() => Some(Rational64::zero()),
                Func::Cos | Func::Exp if r.is_zero() => Some(Rational64::one()),
                Func::Ln if r.is_one() => Some(Rational64::zero()),
                Func::Sqrt if !r.is_negative() => rational_sqrt(r),
                _ => None,
            };
            match folded {
                Some(v) => Expr::Const(Number::Rational(v)),
                None => Expr::Func(f, Box::new(Expr::Const(Number::Rational(r)))),
            }
        }
        Expr::Const(Number::Float(x)) => {
            let v = super::eval::apply_func(f, x);
            if v.is_finite() {
                Expr::Const(Number::Float(v))
            } else {
                Expr::Func(f, Box::new(Expr::Const(Number::Float(x))))
            }
        }
        other => Expr::Func(f, Box::new(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn constants_fold_exactly() {
        assert_eq!(parse("1/2 + 1/3").unwrap(), Expr::rational(5, 6));
        assert_eq!(parse("2*3*x0").unwrap(), Expr::product([Expr::int(6), Expr::var("x0")]));
        assert_eq!(parse("x0*0").unwrap(), Expr::zero());
        assert_eq!(parse("4^(1/2)").unwrap(), Expr::int(2));
        assert_eq!(parse("(9/4)^(3/2)").unwrap(), Expr::rational(27, 8));
    }

    #[test]
    fn negations_normalize() {
        let a = parse("-(-x0)").unwrap();
        assert_eq!(a, Expr::var("x0"));
        let b = parse("(-x0)*(-x1)").unwrap();
        assert_eq!(b, parse("x0*x1").unwrap());
        let c = parse("-1*x0").unwrap();
        assert_eq!(c, Expr::Neg(Box::new(Expr::var("x0"))));
        let d = parse("-(2*x0)").unwrap();
        assert_eq!(d, Expr::product([Expr::int(-2), Expr::var("x0")]));
    }

    #[test]
    fn division_by_constant_becomes_product() {
        assert_eq!(parse("x0/2").unwrap(), parse("(1/2)*x0").unwrap());
        assert_eq!(parse("0/x0").unwrap(), Expr::zero());
    }

    #[test]
    fn special_values_fold() {
        assert_eq!(parse("sin(0) + cos(0) + exp(0) + ln(1)").unwrap(), Expr::int(2));
        // not an exact special value: kept symbolic
        assert!(matches!(parse("sin(1)").unwrap(), Expr::Func(Func::Sin, _)));
    }

    #[test]
    fn power_of_power_with_integer_outer_exponent() {
        assert_eq!(parse("(x0^2)^3").unwrap(), parse("x0^6").unwrap());
        // (x^2)^(1/2) = |x| must not collapse to x
        assert!(matches!(parse("(x0^2)^(1/2)").unwrap(), Expr::Pow(_, _)));
    }
}
