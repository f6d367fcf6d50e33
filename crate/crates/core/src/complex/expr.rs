//! Closed-form holomorphic expressions in one complex variable.
//!
//! Trees are built from constants, the coordinate `z`, sums, products,
//! quotients, negation, `exp`, integer powers and composition. They
//! serialize as JSON objects with an `op` tag and parse from a small infix
//! syntax (`"(z^-2 - 1)/2"`, `"exp(z^2)"`, `"i*cosh(z)"`).

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expr {
    Const { re: f64, im: f64 },
    Var,
    Add { args: Vec<Expr> },
    Mul { args: Vec<Expr> },
    Sub { lhs: Box<Expr>, rhs: Box<Expr> },
    Div { lhs: Box<Expr>, rhs: Box<Expr> },
    Neg { arg: Box<Expr> },
    Exp { arg: Box<Expr> },
    Pow { base: Box<Expr>, exponent: i32 },
    /// `outer(inner(z))`.
    Compose { outer: Box<Expr>, inner: Box<Expr> },
}

// Smart constructors that fold constants; they take owned operands rather
// than implementing the operator traits.
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn constant(c: Complex64) -> Self {
        Expr::Const { re: c.re, im: c.im }
    }

    pub fn real(x: f64) -> Self {
        Expr::Const { re: x, im: 0.0 }
    }

    pub fn var() -> Self {
        Expr::Var
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Const { re, im } => Some(Complex64::new(*re, *im)),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_const() == Some(Complex64::new(0.0, 0.0))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => return Expr::constant(x + y),
            _ if a.is_zero() => return b,
            _ if b.is_zero() => return a,
            _ => {}
        }
        let mut args = Vec::new();
        for e in [a, b] {
            match e {
                Expr::Add { args: inner } => args.extend(inner),
                other => args.push(other),
            }
        }
        Expr::Add { args }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x - y),
            _ if a.is_zero() => Expr::neg(b),
            _ => Expr::Sub { lhs: Box::new(a), rhs: Box::new(b) },
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const { re, im } => Expr::Const { re: -re, im: -im },
            Expr::Neg { arg } => *arg,
            other => Expr::Neg { arg: Box::new(other) },
        }
    }

    /// Product with factor cancellation: equal bases combine their integer
    /// exponents, so `z * z^-1` collapses to `1`.
    pub fn mul(a: Expr, b: Expr) -> Expr {
        let mut coeff = Complex64::new(1.0, 0.0);
        let mut factors = Vec::new();
        a.collect_factors(1, &mut coeff, &mut factors);
        b.collect_factors(1, &mut coeff, &mut factors);
        Expr::rebuild_product(coeff, factors)
    }

    /// Quotient with the same cancellation rules as [`Expr::mul`].
    pub fn div(a: Expr, b: Expr) -> Expr {
        let mut coeff = Complex64::new(1.0, 0.0);
        let mut factors = Vec::new();
        a.collect_factors(1, &mut coeff, &mut factors);
        b.collect_factors(-1, &mut coeff, &mut factors);
        Expr::rebuild_product(coeff, factors)
    }

    pub fn exp(a: Expr) -> Expr {
        match a.as_const() {
            Some(c) => Expr::constant(c.exp()),
            None => Expr::Exp { arg: Box::new(a) },
        }
    }

    pub fn powi(base: Expr, exponent: i32) -> Expr {
        match exponent {
            0 => Expr::real(1.0),
            1 => base,
            _ => {
                let mut coeff = Complex64::new(1.0, 0.0);
                let mut factors = Vec::new();
                base.collect_factors(exponent, &mut coeff, &mut factors);
                Expr::rebuild_product(coeff, factors)
            }
        }
    }

    pub fn compose(outer: Expr, inner: Expr) -> Expr {
        if matches!(inner, Expr::Var) {
            return outer;
        }
        if outer.as_const().is_some() {
            return outer;
        }
        Expr::Compose { outer: Box::new(outer), inner: Box::new(inner) }
    }

    fn collect_factors(&self, power: i32, coeff: &mut Complex64, out: &mut Vec<(Expr, i32)>) {
        match self {
            Expr::Const { re, im } => *coeff *= Complex64::new(*re, *im).powi(power),
            Expr::Mul { args } => {
                for a in args {
                    a.collect_factors(power, coeff, out);
                }
            }
            Expr::Div { lhs, rhs } => {
                lhs.collect_factors(power, coeff, out);
                rhs.collect_factors(-power, coeff, out);
            }
            Expr::Neg { arg } => {
                if power % 2 != 0 {
                    *coeff = -*coeff;
                }
                arg.collect_factors(power, coeff, out);
            }
            Expr::Pow { base, exponent } => base.collect_factors(power * exponent, coeff, out),
            other => {
                if let Some(slot) = out.iter_mut().find(|(b, _)| b == other) {
                    slot.1 += power;
                } else {
                    out.push((other.clone(), power));
                }
            }
        }
    }

    fn rebuild_product(coeff: Complex64, factors: Vec<(Expr, i32)>) -> Expr {
        if coeff == Complex64::new(0.0, 0.0) {
            return Expr::real(0.0);
        }
        let mut args: Vec<Expr> = factors
            .into_iter()
            .filter(|(_, k)| *k != 0)
            .map(|(b, k)| if k == 1 { b } else { Expr::Pow { base: Box::new(b), exponent: k } })
            .collect();
        if args.is_empty() {
            return Expr::constant(coeff);
        }
        if coeff != Complex64::new(1.0, 0.0) {
            args.insert(0, Expr::constant(coeff));
        }
        if args.len() == 1 {
            args.pop().unwrap()
        } else {
            Expr::Mul { args }
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Expr::Const { re, im } => Complex64::new(*re, *im),
            Expr::Var => z,
            Expr::Add { args } => args.iter().map(|a| a.eval(z)).sum(),
            Expr::Mul { args } => args.iter().fold(Complex64::new(1.0, 0.0), |acc, a| acc * a.eval(z)),
            Expr::Sub { lhs, rhs } => lhs.eval(z) - rhs.eval(z),
            Expr::Div { lhs, rhs } => lhs.eval(z) / rhs.eval(z),
            Expr::Neg { arg } => -arg.eval(z),
            Expr::Exp { arg } => arg.eval(z).exp(),
            Expr::Pow { base, exponent } => base.eval(z).powi(*exponent),
            Expr::Compose { outer, inner } => outer.eval(inner.eval(z)),
        }
    }

    /// Symbolic derivative with respect to `z`.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Const { .. } => Expr::real(0.0),
            Expr::Var => Expr::real(1.0),
            Expr::Add { args } => args
                .iter()
                .map(Expr::derivative)
                .fold(Expr::real(0.0), Expr::add),
            Expr::Mul { args } => {
                let mut total = Expr::real(0.0);
                for i in 0..args.len() {
                    let d = args[i].derivative();
                    if d.is_zero() {
                        continue;
                    }
                    let mut term = d;
                    for (k, a) in args.iter().enumerate() {
                        if k != i {
                            term = Expr::mul(term, a.clone());
                        }
                    }
                    total = Expr::add(total, term);
                }
                total
            }
            Expr::Sub { lhs, rhs } => Expr::sub(lhs.derivative(), rhs.derivative()),
            Expr::Div { lhs, rhs } => {
                // (a/b)' = a'/b - a b'/b^2
                let da = lhs.derivative();
                let db = rhs.derivative();
                let first = Expr::div(da, (**rhs).clone());
                if db.is_zero() {
                    return first;
                }
                let second = Expr::div(Expr::mul((**lhs).clone(), db), Expr::powi((**rhs).clone(), 2));
                Expr::sub(first, second)
            }
            Expr::Neg { arg } => Expr::neg(arg.derivative()),
            Expr::Exp { arg } => Expr::mul(self.clone(), arg.derivative()),
            Expr::Pow { base, exponent } => {
                let db = base.derivative();
                if db.is_zero() {
                    return Expr::real(0.0);
                }
                Expr::mul(
                    Expr::mul(Expr::real(f64::from(*exponent)), Expr::powi((**base).clone(), exponent - 1)),
                    db,
                )
            }
            Expr::Compose { outer, inner } => {
                let d_outer = Expr::compose(outer.derivative(), (**inner).clone());
                Expr::mul(d_outer, inner.derivative())
            }
        }
    }

    /// All constants finite.
    pub fn is_finite(&self) -> bool {
        match self {
            Expr::Const { re, im } => re.is_finite() && im.is_finite(),
            Expr::Var => true,
            Expr::Add { args } | Expr::Mul { args } => !args.is_empty() && args.iter().all(Expr::is_finite),
            Expr::Sub { lhs, rhs } | Expr::Div { lhs, rhs } => lhs.is_finite() && rhs.is_finite(),
            Expr::Neg { arg } | Expr::Exp { arg } => arg.is_finite(),
            Expr::Pow { base, .. } => base.is_finite(),
            Expr::Compose { outer, inner } => outer.is_finite() && inner.is_finite(),
        }
    }

    /// `true` when `f(-z) == f(z)` holds on the given probe points within `tol`
    /// relative to the local magnitude.
    pub fn is_even_on(&self, probes: &[Complex64], tol: f64) -> bool {
        probes.iter().all(|&z| {
            let a = self.eval(z);
            let b = self.eval(-z);
            (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
        })
    }

    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        if !e.is_finite() {
            return Err(p.err("non-finite constant"));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const { re, im } => match (*re, *im) {
                (r, 0.0) => write!(f, "{r}"),
                (0.0, 1.0) => write!(f, "i"),
                (0.0, i) => write!(f, "({i}*i)"),
                (r, i) => write!(f, "({r}+{i}*i)"),
            },
            Expr::Var => write!(f, "z"),
            Expr::Add { args } => {
                write!(f, "(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Mul { args } => {
                write!(f, "(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Sub { lhs, rhs } => write!(f, "({lhs} - {rhs})"),
            Expr::Div { lhs, rhs } => write!(f, "({lhs}/{rhs})"),
            Expr::Neg { arg } => write!(f, "(-{arg})"),
            Expr::Exp { arg } => write!(f, "exp({arg})"),
            Expr::Pow { base, exponent } => write!(f, "{base}^({exponent})"),
            Expr::Compose { outer, inner } => write!(f, "[{outer}]∘[{inner}]"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat('-') {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::mul(lhs, self.unary()?);
            } else if self.eat('/') {
                lhs = Expr::div(lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::neg(self.unary()?));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat('^') {
            let k = self.integer_exponent()?;
            return Ok(Expr::powi(base, k));
        }
        Ok(base)
    }

    fn integer_exponent(&mut self) -> Result<i32> {
        let paren = self.eat('(');
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        self.skip_ws();
        let digits: String = self.rest().chars().take_while(char::is_ascii_digit).collect();
        if digits.is_empty() {
            return Err(self.err("exponent must be an integer literal"));
        }
        self.pos += digits.len();
        if matches!(self.rest().chars().next(), Some('.') | Some('e') | Some('E')) {
            return Err(self.err("exponent must be an integer literal"));
        }
        if paren && !self.eat(')') {
            return Err(self.err("expected ')'"));
        }
        let k: i32 = digits.parse().map_err(|_| self.err("exponent out of range"))?;
        Ok(if neg { -k } else { k })
    }

    fn number(&mut self) -> Result<f64> {
        let bytes = self.rest().as_bytes();
        let mut end = 0;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            let digits_start = k;
            while k < bytes.len() && bytes[k].is_ascii_digit() {
                k += 1;
            }
            if k > digits_start {
                end = k;
            }
        }
        let text = &self.rest()[..end];
        let value: f64 = text.parse().map_err(|_| self.err("malformed number"))?;
        self.pos += end;
        Ok(value)
    }

    fn ident(&mut self) -> String {
        let s: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        self.pos += s.len();
        s
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some('(') => {
                self.eat('(');
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => Ok(Expr::real(self.number()?)),
            Some(c) if c.is_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                match name.as_str() {
                    "z" | "zeta" | "ζ" => Ok(Expr::Var),
                    "i" => Ok(Expr::constant(Complex64::i())),
                    "pi" => Ok(Expr::real(std::f64::consts::PI)),
                    "e" => Ok(Expr::real(std::f64::consts::E)),
                    "exp" | "sinh" | "cosh" | "sin" | "cos" => {
                        if !self.eat('(') {
                            return Err(self.err("expected '(' after function name"));
                        }
                        let arg = self.expr()?;
                        if !self.eat(')') {
                            return Err(self.err("expected ')'"));
                        }
                        Ok(apply_function(&name, arg))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.err(&format!("unknown identifier '{name}'")))
                    }
                }
            }
            Some(_) => Err(self.err("unexpected character")),
        }
    }
}

fn apply_function(name: &str, arg: Expr) -> Expr {
    let half = Expr::real(0.5);
    let i = Expr::constant(Complex64::i());
    match name {
        "exp" => Expr::exp(arg),
        "cosh" => Expr::mul(half, Expr::add(Expr::exp(arg.clone()), Expr::exp(Expr::neg(arg)))),
        "sinh" => Expr::mul(half, Expr::sub(Expr::exp(arg.clone()), Expr::exp(Expr::neg(arg)))),
        "cos" => {
            let iz = Expr::mul(i, arg);
            Expr::mul(half, Expr::add(Expr::exp(iz.clone()), Expr::exp(Expr::neg(iz))))
        }
        "sin" => {
            let iz = Expr::mul(i, arg);
            let diff = Expr::sub(Expr::exp(iz.clone()), Expr::exp(Expr::neg(iz)));
            Expr::mul(Expr::constant(Complex64::new(0.0, -0.5)), diff)
        }
        _ => unreachable!("checked by caller"),
    }
}
