//! Infix printing. Canonical trees without differentiated opaque functions
//! print to text that parses back to the same tree.

use std::borrow::Cow;
use std::fmt::{self, Write};

use num_rational::Rational64;
use num_traits::Signed;

use super::{Expr, Number};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Sum(_) => SUM,
        Expr::Product(_) | Expr::Div(..) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::Pow(..) => POWER,
        Expr::Const(Number::Rational(r)) if !r.is_integer() => PRODUCT,
        Expr::Const(n) if n.is_negative() => UNARY,
        Expr::Const(_) | Expr::Var(_) | Expr::Func(..) | Expr::Opaque { .. } => ATOM,
    }
}

/// Splits a leading minus sign off a sum term.
fn split_sign(e: &Expr) -> (bool, Cow<'_, Expr>) {
    match e {
        Expr::Neg(inner) => (true, Cow::Borrowed(inner)),
        Expr::Const(n) if n.is_negative() => (true, Cow::Owned(Expr::Const(n.abs()))),
        Expr::Product(xs) => match xs.first() {
            Some(Expr::Const(n)) if n.is_negative() => {
                let mut ys = xs.clone();
                ys[0] = Expr::Const(n.abs());
                (true, Cow::Owned(Expr::Product(ys)))
            }
            _ => (false, Cow::Borrowed(e)),
        },
        _ => (false, Cow::Borrowed(e)),
    }
}

fn write_min(e: &Expr, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
    if level(e) < min {
        f.write_char('(')?;
        write_expr(e, f)?;
        f.write_char(')')
    } else {
        write_expr(e, f)
    }
}

fn write_number(n: Number, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match n {
        Number::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
        Number::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        Number::Float(x) => write!(f, "{x:?}"),
    }
}

fn write_exponent(p: Rational64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_integer() && !p.is_negative() {
        write!(f, "{}", p.numer())
    } else if p.is_integer() {
        write!(f, "({})", p.numer())
    } else {
        write!(f, "({}/{})", p.numer(), p.denom())
    }
}

pub(super) fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Const(n) => write_number(*n, f),
        Expr::Var(v) => f.write_str(v),
        Expr::Sum(terms) => {
            for (i, t) in terms.iter().enumerate() {
                if i == 0 {
                    write_min(t, f, PRODUCT)?;
                    continue;
                }
                let (neg, abs) = split_sign(t);
                f.write_str(if neg { " - " } else { " + " })?;
                write_min(&abs, f, PRODUCT)?;
            }
            Ok(())
        }
        Expr::Product(factors) => {
            for (i, x) in factors.iter().enumerate() {
                if i == 0 {
                    write_min(x, f, PRODUCT)?;
                } else {
                    f.write_char('*')?;
                    write_min(x, f, POWER)?;
                }
            }
            Ok(())
        }
        Expr::Div(a, b) => {
            write_min(a, f, PRODUCT)?;
            f.write_char('/')?;
            write_min(b, f, POWER)
        }
        Expr::Neg(inner) => {
            f.write_char('-')?;
            let wrap = match &**inner {
                Expr::Product(_) => false,
                other => level(other) < POWER,
            };
            if wrap {
                f.write_char('(')?;
                write_expr(inner, f)?;
                f.write_char(')')
            } else {
                write_expr(inner, f)
            }
        }
        Expr::Pow(base, p) => {
            write_min(base, f, ATOM)?;
            f.write_char('^')?;
            write_exponent(*p, f)
        }
        Expr::Func(func, arg) => {
            write!(f, "{}(", func.name())?;
            write_expr(arg, f)?;
            f.write_char(')')
        }
        Expr::Opaque { name, arg, order } => {
            f.write_str(name)?;
            for _ in 0..*order {
                f.write_char('\'')?;
            }
            f.write_char('(')?;
            write_expr(arg, f)?;
            f.write_char(')')
        }
    }
}
