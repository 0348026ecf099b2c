//! Energy profiles `e(t)` given as expressions in `t`.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | atom
//! atom   := number | 't' | func '(' expr ')' | '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp'
//! ```
//!
//! Derivatives are symbolic, so `e'(t)` is exact up to rounding.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("parse error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("profile is not positive on [0, 1]: minimum {min} at t = {at}")]
    NotPositive { min: f64, at: f64 },
    #[error("profile is not finite at t = {0}")]
    NotFinite(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    T,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

use Expr::*;

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

impl Expr {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Num(x) => *x,
            T => t,
            Neg(a) => -a.eval(t),
            Add(a, c) => a.eval(t) + c.eval(t),
            Sub(a, c) => a.eval(t) - c.eval(t),
            Mul(a, c) => a.eval(t) * c.eval(t),
            Div(a, c) => a.eval(t) / c.eval(t),
            Sin(a) => a.eval(t).sin(),
            Cos(a) => a.eval(t).cos(),
            Exp(a) => a.eval(t).exp(),
        }
    }

    /// Symbolic derivative in `t`, lightly simplified.
    pub fn derivative(&self) -> Expr {
        match self {
            Num(_) => Num(0.0),
            T => Num(1.0),
            Neg(a) => neg(a.derivative()),
            Add(a, c) => add(a.derivative(), c.derivative()),
            Sub(a, c) => sub(a.derivative(), c.derivative()),
            Mul(a, c) => add(mul(a.derivative(), (**c).clone()), mul((**a).clone(), c.derivative())),
            Div(a, c) => div(
                sub(mul(a.derivative(), (**c).clone()), mul((**a).clone(), c.derivative())),
                mul((**c).clone(), (**c).clone()),
            ),
            Sin(a) => mul(Cos(a.clone()), a.derivative()),
            Cos(a) => mul(neg(Sin(a.clone())), a.derivative()),
            Exp(a) => mul(Exp(a.clone()), a.derivative()),
        }
    }
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Num(x) if *x == v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Num(x) => Num(-x),
        Neg(x) => *x,
        other => Neg(b(other)),
    }
}

fn add(a: Expr, c: Expr) -> Expr {
    if is_num(&a, 0.0) {
        c
    } else if is_num(&c, 0.0) {
        a
    } else {
        Add(b(a), b(c))
    }
}

fn sub(a: Expr, c: Expr) -> Expr {
    if is_num(&c, 0.0) {
        a
    } else if is_num(&a, 0.0) {
        neg(c)
    } else {
        Sub(b(a), b(c))
    }
}

fn mul(a: Expr, c: Expr) -> Expr {
    if is_num(&a, 0.0) || is_num(&c, 0.0) {
        Num(0.0)
    } else if is_num(&a, 1.0) {
        c
    } else if is_num(&c, 1.0) {
        a
    } else {
        Mul(b(a), b(c))
    }
}

fn div(a: Expr, c: Expr) -> Expr {
    if is_num(&a, 0.0) {
        Num(0.0)
    } else {
        Div(b(a), b(c))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num(x) => write!(f, "{x}"),
            T => write!(f, "t"),
            Neg(a) => write!(f, "-({a})"),
            Add(a, c) => write!(f, "({a} + {c})"),
            Sub(a, c) => write!(f, "({a} - {c})"),
            Mul(a, c) => write!(f, "({a} * {c})"),
            Div(a, c) => write!(f, "({a} / {c})"),
            Sin(a) => write!(f, "sin({a})"),
            Cos(a) => write!(f, "cos({a})"),
            Exp(a) => write!(f, "exp({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ProfileError> {
        Err(ProfileError::Parse {
            pos: self.pos,
            message: message.into(),
        })
    }

    fn skip(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ProfileError> {
        let mut e = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let r = self.term()?;
            e = if c == b'+' { Add(b(e), b(r)) } else { Sub(b(e), b(r)) };
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Expr, ProfileError> {
        let mut e = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let r = self.unary()?;
            e = if c == b'*' { Mul(b(e), b(r)) } else { Div(b(e), b(r)) };
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, ProfileError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Neg(b(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ProfileError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                if name == "t" {
                    return Ok(T);
                }
                let wrap: fn(Box<Expr>) -> Expr = match name {
                    "sin" => Sin,
                    "cos" => Cos,
                    "exp" => Exp,
                    _ => {
                        self.pos = start;
                        return self.err(format!("unknown identifier `{name}`"));
                    }
                };
                if self.peek() != Some(b'(') {
                    return self.err(format!("expected `(` after `{name}`"));
                }
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(wrap(b(e)))
            }
            Some(c) => self.err(format!("unexpected `{}`", c as char)),
            None => self.err("unexpected end of expression"),
        }
    }

    fn number(&mut self) -> Result<Expr, ProfileError> {
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < s.len() && s[self.pos] == b'.' {
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
            if self.pos == before {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(x) => Ok(Num(x)),
            Err(_) => {
                self.pos = start;
                self.err(format!("bad number `{text}`"))
            }
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ProfileError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Number of probe points used to certify positivity and find extrema.
pub const PROBES: usize = 1024;

/// A smooth positive energy profile on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EnergyProfile {
    source: String,
    #[serde(skip)]
    expr: Expr,
    #[serde(skip)]
    deriv: Expr,
}

impl TryFrom<String> for EnergyProfile {
    type Error = ProfileError;

    fn try_from(s: String) -> Result<Self, ProfileError> {
        Self::parse(&s)
    }
}

impl From<EnergyProfile> for String {
    fn from(p: EnergyProfile) -> String {
        p.source
    }
}

impl EnergyProfile {
    /// Parse and check positivity on a probe grid of [`PROBES`] points.
    pub fn parse(source: &str) -> Result<Self, ProfileError> {
        let expr = parse(source)?;
        let deriv = expr.derivative();
        let p = Self {
            source: source.trim().to_string(),
            expr,
            deriv,
        };
        let (min, at) = p.min_with_location();
        if !min.is_finite() {
            return Err(ProfileError::NotFinite(at));
        }
        if min <= 0.0 {
            return Err(ProfileError::NotPositive { min, at });
        }
        for i in 0..PROBES {
            let t = i as f64 / (PROBES - 1) as f64;
            if !p.derivative(t).is_finite() {
                return Err(ProfileError::NotFinite(t));
            }
        }
        Ok(p)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.expr.eval(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.deriv.eval(t)
    }

    fn min_with_location(&self) -> (f64, f64) {
        (0..PROBES)
            .map(|i| {
                let t = i as f64 / (PROBES - 1) as f64;
                (self.eval(t), t)
            })
            .fold(
                (f64::INFINITY, 0.0),
                |a, b| if b.0.is_nan() || b.0 < a.0 { b } else { a },
            )
    }

    pub fn min(&self) -> f64 {
        self.min_with_location().0
    }

    pub fn max(&self) -> f64 {
        (0..PROBES)
            .map(|i| self.eval(i as f64 / (PROBES - 1) as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_differentiates() {
        let p = EnergyProfile::parse("1 - t/2").unwrap();
        assert_eq!(p.eval(0.5), 0.75);
        assert_eq!(p.derivative(0.3), -0.5);
        let q = EnergyProfile::parse("2 + sin(3*t) * exp(-t)").unwrap();
        let t: f64 = 0.4;
        let exact = (3.0 * (3.0 * t).cos() - (3.0 * t).sin()) * (-t).exp();
        assert!((q.derivative(t) - exact).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse("1 +"), Err(ProfileError::Parse { .. })));
        assert!(matches!(parse("x"), Err(ProfileError::Parse { .. })));
        assert!(matches!(parse("sin t"), Err(ProfileError::Parse { .. })));
        assert!(matches!(
            EnergyProfile::parse("t - 0.5"),
            Err(ProfileError::NotPositive { .. })
        ));
        assert!(matches!(EnergyProfile::parse("1/t"), Err(ProfileError::NotFinite(_))));
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e2").unwrap().eval(0.0), 150.0);
        assert_eq!(parse("2e-1*t").unwrap().eval(1.0), 0.2);
    }
}
