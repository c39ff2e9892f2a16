use num_rational::Rational64;
use num_traits::One;

use super::{Expr, Func};

impl Expr {
    /// Exact partial derivative with respect to `var`, canonicalized.
    pub fn diff(&self, var: &str) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(v) => {
                if v == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Sum(terms) => Expr::sum(terms.iter().map(|t| t.diff(var))),
            Expr::Product(factors) => {
                let mut terms = Vec::with_capacity(factors.len());
                for (i, f) in factors.iter().enumerate() {
                    let d = f.diff(var);
                    if d.is_literal_zero() {
                        continue;
                    }
                    let mut fs = factors.clone();
                    fs[i] = d;
                    terms.push(Expr::product(fs));
                }
                Expr::sum(terms)
            }
            Expr::Pow(base, p) => {
                let db = base.diff(var);
                if db.is_literal_zero() {
                    return Expr::zero();
                }
                let coeff = Expr::Const(super::Number::Rational(*p));
                let lowered = (**base).clone().pow(*p - Rational64::one());
                Expr::product([coeff, lowered, db])
            }
            Expr::Neg(inner) => -inner.diff(var),
            Expr::Div(a, b) => {
                let da = a.diff(var);
                let db = b.diff(var);
                if db.is_literal_zero() {
                    return da / (**b).clone();
                }
                let num = da * (**b).clone() - (**a).clone() * db;
                num / (**b).clone().powi(2)
            }
            Expr::Func(f, arg) => {
                let da = arg.diff(var);
                if da.is_literal_zero() {
                    return Expr::zero();
                }
                let a = (**arg).clone();
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => -a.sin(),
                    Func::Exp => a.exp(),
                    Func::Ln => Expr::one() / a,
                    Func::Sqrt => Expr::one() / (Expr::int(2) * a.sqrt()),
                    Func::Arctan => Expr::one() / (Expr::one() + a.powi(2)),
                };
                outer * da
            }
            Expr::Opaque { name, arg, order } => {
                let da = arg.diff(var);
                if da.is_literal_zero() {
                    return Expr::zero();
                }
                let outer = Expr::Opaque { name: name.clone(), arg: arg.clone(), order: order + 1 };
                outer * da
            }
        }
    }

    /// Repeated differentiation.
    pub fn diff_n(&self, var: &str, times: usize) -> Expr {
        (0..times).fold(self.clone(), |acc, _| acc.diff(var))
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Expr};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn power_rule() {
        assert_eq!(p("x0^2").diff("x0"), p("2*x0"));
        assert_eq!(p("x0^3").diff_n("x0", 3), Expr::int(6));
        assert_eq!(p("x0^2").diff_n("x0", 3), Expr::zero());
        assert_eq!(p("x1^2").diff("x0"), Expr::zero());
    }

    #[test]
    fn opaque_order_increments_under_chain_rule() {
        let d = p("Phi(x0 + x3)").diff("x0");
        assert_eq!(
            d,
            Expr::Opaque { name: "Phi".into(), arg: Box::new(p("x0 + x3")), order: 1 }
        );
        let dd = d.diff("x3");
        assert!(matches!(dd, Expr::Opaque { order: 2, .. }));
        // inner derivative 2 appears as a constant factor
        let e = p("Phi(2*x0)").diff("x0");
        assert_eq!(e.to_string(), "2*Phi'(2*x0)");
    }

    #[test]
    fn sqrt_gradient_shape() {
        // x1 / sqrt(x1^2 + x2^2 + x3^2), up to canonical arrangement
        let d = p("sqrt(x1^2 + x2^2 + x3^2)").diff("x1");
        let expected = p("x1/sqrt(x1^2 + x2^2 + x3^2)");
        let at = [("x1", 1.0), ("x2", 2.0), ("x3", 2.0)];
        let a = crate::expr::eval::eval_f64(&d, &at).unwrap();
        let b = crate::expr::eval::eval_f64(&expected, &at).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!((a - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rational_constants_survive_differentiation() {
        let d = p("(1/3)*x0^3").diff("x0");
        assert_eq!(d, p("x0^2"));
    }
}
