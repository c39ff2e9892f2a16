//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' exponent)?
//! base   := number | ident | ident '(' expr ')' | '(' expr ')'
//! exponent := '-'? integer | '(' '-'? integer ('/' integer)? ')'
//! ```
//!
//! Lower-case identifiers name variables or the elementary functions;
//! capitalized identifiers followed by an argument list are opaque
//! functions. Primes on names (`Phi'`) are rejected: derivative order is an
//! internal notion only.

use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use super::{Expr, Func, Number};

/// Variables the grammar accepts.
pub const KNOWN_VARIABLES: &[&str] =
    &["x0", "x1", "x2", "x3", "y", "z", "v", "w", "vs", "lam", "phi", "u", "t"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    UnknownIdentifier(String),
    Arity { name: String, expected: usize, found: usize },
    PrimedName(String),
    BadExponent,
    BadNumber(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier `{s}`"),
            ParseErrorKind::Arity { name, expected, found } => {
                write!(f, "`{name}` takes {expected} argument(s), found {found}")
            }
            ParseErrorKind::PrimedName(s) => {
                write!(f, "derivative marks are not accepted on input (`{s}`)")
            }
            ParseErrorKind::BadExponent => write!(f, "exponent must be a signed rational"),
            ParseErrorKind::BadNumber(s) => write!(f, "malformed number `{s}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

/// Parses `text` into a canonical expression.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.unexpected());
    }
    Ok(e.canon())
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { offset, kind }
    }

    fn unexpected(&self) -> ParseError {
        match self.peek_char() {
            Some(c) => self.err(self.pos, ParseErrorKind::UnexpectedChar(c)),
            None => self.err(self.pos, ParseErrorKind::UnexpectedEnd),
        }
    }

    fn peek_char(&self) -> Option<char> {
        std::str::from_utf8(&self.src[self.pos..]).ok()?.chars().next()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(Expr::Neg(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.factor()?;
                acc = match acc {
                    Expr::Product(mut xs) => {
                        xs.push(rhs);
                        Expr::Product(xs)
                    }
                    other => Expr::Product(vec![other, rhs]),
                };
            } else if self.eat(b'/') {
                let rhs = self.factor()?;
                acc = Expr::Div(Box::new(acc), Box::new(rhs));
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.eat(b'^') {
            let p = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), p));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(start, ParseErrorKind::BadExponent));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse().map_err(|_| self.err(start, ParseErrorKind::BadExponent))
    }

    fn exponent(&mut self) -> Result<Rational64, ParseError> {
        let start = self.pos;
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        let num = self.integer()?;
        let mut den = 1;
        if paren {
            if self.eat(b'/') {
                den = self.integer()?;
                if den == 0 {
                    return Err(self.err(start, ParseErrorKind::BadExponent));
                }
            }
            self.expect(b')')?;
        }
        if self.peek() == Some(b'.') {
            return Err(self.err(self.pos, ParseErrorKind::BadExponent));
        }
        Ok(Rational64::new(if neg { -num } else { num }, den))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        digits(&mut self.pos);
        let mut is_float = false;
        if self.pos < s.len() && s[self.pos] == b'.' {
            is_float = true;
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            let before = self.pos;
            digits(&mut self.pos);
            if before == self.pos {
                // not an exponent after all, e.g. "2exp": leave for the caller
                self.pos = save;
            } else {
                is_float = true;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap();
        let bad = || self.err(start, ParseErrorKind::BadNumber(text.to_string()));
        if is_float {
            let v: f64 = text.parse().map_err(|_| bad())?;
            Ok(Expr::Const(Number::Float(v)))
        } else {
            match text.parse::<i64>() {
                Ok(n) => Ok(Expr::int(n)),
                Err(_) => Ok(Expr::Const(Number::Float(text.parse().map_err(|_| bad())?))),
            }
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8(self.src[start..self.pos].to_vec()).unwrap()
    }

    fn arguments(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect(b'(')?;
        let mut args = Vec::new();
        if self.eat(b')') {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(b',') {
                continue;
            }
            self.expect(b')')?;
            return Ok(args);
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let c = match self.peek() {
            Some(c) => c,
            None => return Err(self.unexpected()),
        };
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if !(c.is_ascii_alphabetic() || c == b'_') {
            return Err(self.unexpected());
        }
        let start = self.pos;
        let name = self.ident();
        if self.pos < self.src.len() && self.src[self.pos] == b'\'' {
            while self.pos < self.src.len() && self.src[self.pos] == b'\'' {
                self.pos += 1;
            }
            let primed = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
            return Err(self.err(start, ParseErrorKind::PrimedName(primed)));
        }
        let is_call = self.peek() == Some(b'(');
        let capitalized = name.as_bytes()[0].is_ascii_uppercase();
        if let Some(f) = Func::from_name(&name) {
            if !is_call {
                return Err(self.err(start, ParseErrorKind::Arity { name, expected: 1, found: 0 }));
            }
            let mut args = self.arguments()?;
            if args.len() != 1 {
                let found = args.len();
                return Err(self.err(start, ParseErrorKind::Arity { name, expected: 1, found }));
            }
            return Ok(Expr::Func(f, Box::new(args.pop().unwrap())));
        }
        if capitalized && is_call {
            let mut args = self.arguments()?;
            if args.len() != 1 {
                let found = args.len();
                return Err(self.err(start, ParseErrorKind::Arity { name, expected: 1, found }));
            }
            return Ok(Expr::Opaque { name, arg: Box::new(args.pop().unwrap()), order: 0 });
        }
        if name == "pi" && !is_call {
            return Ok(Expr::Const(Number::Float(std::f64::consts::PI)));
        }
        if KNOWN_VARIABLES.contains(&name.as_str()) && !is_call {
            return Ok(Expr::Var(name));
        }
        Err(self.err(start, ParseErrorKind::UnknownIdentifier(name)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Expr {
        Expr::var(s)
    }

    #[test]
    fn difference_of_squares_shape() {
        let e = parse("x0^2 - x1^2").unwrap();
        let expected = Expr::Sum(vec![
            Expr::Pow(Box::new(v("x0")), 2.into()),
            Expr::Neg(Box::new(Expr::Pow(Box::new(v("x1")), 2.into()))),
        ]);
        assert_eq!(e, expected);
    }

    #[test]
    fn radial_distance() {
        let e = parse("sqrt(x1^2 + x2^2 + x3^2)").unwrap();
        match e {
            Expr::Func(Func::Sqrt, inner) => assert!(matches!(*inner, Expr::Sum(ref t) if t.len() == 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn opaque_call() {
        let e = parse("Phi(x0 + x3)").unwrap();
        assert_eq!(
            e,
            Expr::Opaque {
                name: "Phi".into(),
                arg: Box::new(Expr::Sum(vec![v("x0"), v("x3")])),
                order: 0
            }
        );
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(parse("-x0^2").unwrap(), Expr::Neg(Box::new(parse("x0^2").unwrap())));
    }

    #[test]
    fn exponents() {
        assert_eq!(parse("x0^(1/2)").unwrap(), Expr::Pow(Box::new(v("x0")), Rational64::new(1, 2)));
        assert_eq!(parse("x0^-1").unwrap(), Expr::Pow(Box::new(v("x0")), (-1).into()));
        assert_eq!(parse("x0^(-3/2)").unwrap(), Expr::Pow(Box::new(v("x0")), Rational64::new(-3, 2)));
        assert_eq!(parse("x0^0.5").unwrap_err().kind, ParseErrorKind::BadExponent);
    }

    #[test]
    fn numbers() {
        assert_eq!(parse("0.5").unwrap(), Expr::Const(Number::Float(0.5)));
        assert_eq!(parse("1e-3").unwrap(), Expr::Const(Number::Float(1e-3)));
        assert_eq!(parse("12").unwrap(), Expr::int(12));
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse("x0 + $").unwrap_err();
        assert_eq!(e.offset, 5);
        assert_eq!(e.kind, ParseErrorKind::UnexpectedChar('$'));

        let e = parse("x0 + foo").unwrap_err();
        assert_eq!((e.offset, e.kind), (5, ParseErrorKind::UnknownIdentifier("foo".into())));

        let e = parse("sin(x0, x1)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Arity { name: "sin".into(), expected: 1, found: 2 });

        let e = parse("2*sin").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Arity { found: 0, .. }));

        let e = parse("Phi'(x0)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::PrimedName("Phi'".into()));
        let e = parse("Phi''(x0)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::PrimedName("Phi''".into()));

        assert_eq!(parse("(x0").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(parse("x0 x1").unwrap_err().offset, 3);
        // lower-case call of an unknown function
        assert!(matches!(parse("f(x0)").unwrap_err().kind, ParseErrorKind::UnknownIdentifier(_)));
        // capitalized name used as a plain variable
        assert!(matches!(parse("Phi + 1").unwrap_err().kind, ParseErrorKind::UnknownIdentifier(_)));
    }
}
