//! Expression trees for surface components: parsing, printing, evaluation.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! atom    := number | 'x' | 'y' | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! Exponents must be non-negative integer literals, optionally parenthesized.

use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sinh,
    Cosh,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    fn apply<S: Scalar>(self, v: S) -> S {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdentifier(String),
    NonIntegerExponent,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{} at byte {offset}", describe(.kind))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::Syntax(msg) => format!("syntax error: {msg}"),
        ParseErrorKind::UnknownIdentifier(name) => format!("unknown identifier '{name}'"),
        ParseErrorKind::NonIntegerExponent => "non-integer exponent".to_string(),
    }
}

pub fn parse_expression(text: &str) -> std::result::Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected '{}'", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, msg: String) -> ParseError {
        ParseError { kind: ParseErrorKind::Syntax(msg), offset: self.pos }
    }

    fn expect(&mut self, c: u8) -> std::result::Result<(), ParseError> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => Err(self.syntax(format!("expected '{}', found '{}'", c as char, got as char))),
            None => Err(self.syntax(format!("expected '{}', found end of input", c as char))),
        }
    }

    fn sum(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> std::result::Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            // a signed literal is one constant unless a power binds tighter
            if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
                let save = self.pos;
                if let Expr::Const(v) = self.number()? {
                    if self.peek() != Some(b'^') {
                        return Ok(Expr::Const(-v));
                    }
                }
                self.pos = save;
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> std::result::Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> std::result::Result<u32, ParseError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let non_integer = ParseError { kind: ParseErrorKind::NonIntegerExponent, offset: start };
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let n = self.exponent()?;
            self.expect(b')')?;
            return Ok(n);
        }
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(non_integer);
        }
        // reject fractional or scientific literals such as 2.5 or 1e3
        if matches!(self.src.get(self.pos), Some(b'.' | b'e' | b'E')) {
            return Err(non_integer);
        }
        std::str::from_utf8(&self.src[digits_start..self.pos])
            .unwrap()
            .parse::<u32>()
            .map_err(|_| self.syntax("exponent too large".into()))
    }

    fn atom(&mut self) -> std::result::Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input".into())),
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match name {
                    "x" => Ok(Expr::X),
                    "y" => Ok(Expr::Y),
                    _ => match Func::from_name(name) {
                        Some(f) => {
                            self.expect(b'(')?;
                            let arg = self.sum()?;
                            self.expect(b')')?;
                            Ok(Expr::Call(f, Box::new(arg)))
                        }
                        None => Err(ParseError {
                            kind: ParseErrorKind::UnknownIdentifier(name.to_string()),
                            offset: start,
                        }),
                    },
                }
            }
            Some(c) => Err(self.syntax(format!("unexpected '{}'", c as char))),
        }
    }

    fn number(&mut self) -> std::result::Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(ParseError {
                kind: ParseErrorKind::Syntax("malformed number".into()),
                offset: start,
            });
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax("malformed exponent in number".into()),
                    offset: save,
                });
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Expr::Const).map_err(|_| ParseError {
            kind: ParseErrorKind::Syntax("malformed number".into()),
            offset: start,
        })
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized form; re-parses to an identical tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => write!(f, "(-{})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Neg(a) if matches!(**a, Expr::Const(_)) => write!(f, "(-({a}))"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl Expr {
    /// Evaluates at `(x, y)`. Division by a quantity whose value vanishes
    /// is a numerical-domain error.
    pub fn eval<S: Scalar>(&self, x: S, y: S) -> Result<S> {
        Ok(match self {
            Expr::Const(c) => S::lit(*c),
            Expr::X => x,
            Expr::Y => y,
            Expr::Neg(a) => -a.eval(x, y)?,
            Expr::Add(a, b) => a.eval(x, y)? + b.eval(x, y)?,
            Expr::Sub(a, b) => a.eval(x, y)? - b.eval(x, y)?,
            Expr::Mul(a, b) => a.eval(x, y)? * b.eval(x, y)?,
            Expr::Div(a, b) => {
                let den = b.eval(x, y)?;
                if den.re_f64().abs() < 1e-300 {
                    return Err(Error::NumericalDomain(format!(
                        "division by zero evaluating {self} at ({}, {})",
                        x.re_f64(),
                        y.re_f64()
                    )));
                }
                a.eval(x, y)? / den
            }
            Expr::Pow(a, n) => a.eval(x, y)?.powu(*n),
            Expr::Call(func, a) => func.apply(a.eval(x, y)?),
        })
    }

    /// Replaces `x` and `y` by the given expressions.
    pub fn substitute(&self, sx: &Expr, sy: &Expr) -> Expr {
        let rec = |e: &Expr| Box::new(e.substitute(sx, sy));
        match self {
            Expr::Const(_) => self.clone(),
            Expr::X => sx.clone(),
            Expr::Y => sy.clone(),
            Expr::Neg(a) => Expr::Neg(rec(a)),
            Expr::Add(a, b) => Expr::Add(rec(a), rec(b)),
            Expr::Sub(a, b) => Expr::Sub(rec(a), rec(b)),
            Expr::Mul(a, b) => Expr::Mul(rec(a), rec(b)),
            Expr::Div(a, b) => Expr::Div(rec(a), rec(b)),
            Expr::Pow(a, n) => Expr::Pow(rec(a), *n),
            Expr::Call(func, a) => Expr::Call(*func, rec(a)),
        }
    }

    /// `c0 + cx·x + cy·y`.
    pub fn affine(c0: f64, cx: f64, cy: f64) -> Expr {
        let term = |c: f64, v: Expr| Expr::Mul(Box::new(Expr::Const(c)), Box::new(v));
        Expr::Add(
            Box::new(Expr::Add(Box::new(Expr::Const(c0)), Box::new(term(cx, Expr::X)))),
            Box::new(term(cy, Expr::Y)),
        )
    }
}
