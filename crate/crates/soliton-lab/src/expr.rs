//! Scalar coordinate functions: parsing, printing and jet evaluation.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := ("-" factor) | power ;
//! power  := atom ("^" factor)? ;
//! atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")" ;
//! ```
//!
//! Functions: `exp`, `log`, `sin`, `cos`, `sqrt`. Numbers are decimal with an
//! optional exponent. `^` is right-associative and binds tighter than unary
//! minus, so `-x^2` parses as `-(x^2)`; write `(-x)^2` for the other reading.
//! Whether an identifier is a coordinate or a parameter is decided by the
//! evaluation context, not by syntax.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::jet::{seed_jets, Jet, JetError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Parsed abstract syntax of a scalar coordinate function. Immutable after
/// parse; a [`Name`](Expr::Name) resolves to a coordinate or a parameter at
/// evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Name(String),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: &'static str,
        found: String,
    },
    #[error("unknown function `{name}` at byte {offset} (known: exp, log, sin, cos, sqrt)")]
    UnknownFunction { name: String, offset: usize },
    #[error("empty expression")]
    Empty,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound name `{0}` (neither a coordinate nor a parameter)")]
    UnboundName(String),
    #[error("in `{expr}`: {source}")]
    Jet {
        expr: String,
        #[source]
        source: JetError,
    },
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(v) => format!("number `{v}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut k = i + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        i = k;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let slice = &text[start..i];
                let value = f64::from_str(slice).map_err(|_| ParseError::Syntax {
                    offset: start,
                    expected: "a number",
                    found: format!("`{slice}`"),
                })?;
                toks.push((Tok::Number(value), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: i,
                    expected: "a token",
                    found: format!("`{}`", &text[i..i + 1]),
                })
            }
        }
    }
    toks.push((Tok::Eof, bytes.len()));
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        self.pos += 1;
        t
    }

    fn err(&self, expected: &'static str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Tok::Minus) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Tok::Caret) {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Number(v) => {
                self.bump();
                Ok(Expr::Constant(v))
            }
            Tok::Ident(name) => {
                self.bump();
                if matches!(self.peek(), Tok::LParen) {
                    let func = Func::from_name(&name)
                        .ok_or(ParseError::UnknownFunction { name, offset })?;
                    self.bump();
                    let arg = self.expr()?;
                    if !matches!(self.peek(), Tok::RParen) {
                        return Err(self.err("`)`"));
                    }
                    self.bump();
                    Ok(Expr::Call(func, Box::new(arg)))
                } else {
                    Ok(Expr::Name(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if !matches!(self.peek(), Tok::RParen) {
                    return Err(self.err("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.err("a number, identifier or `(`")),
        }
    }
}

/// Parse an expression; errors carry the byte offset of the offending token
/// (end-of-input errors point one past the last byte).
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.err("an operator or end of input"));
    }
    Ok(e)
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

// ---------------------------------------------------------------------------
// Printing (precedence-aware; parse . print . parse == parse)
// ---------------------------------------------------------------------------

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(..) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            Expr::Constant(_) | Expr::Name(_) | Expr::Call(..) => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.prec() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(v) => write!(f, "{v:?}"),
            Expr::Name(n) => write!(f, "{n}"),
            Expr::Neg(inner) => {
                write!(f, "-")?;
                inner.fmt_child(f, 3)
            }
            Expr::Call(func, arg) => write!(f, "{}({})", func.name(), arg),
            Expr::Binary(op, lhs, rhs) => match op {
                BinOp::Add => {
                    lhs.fmt_child(f, 1)?;
                    write!(f, " + ")?;
                    rhs.fmt_child(f, 2)
                }
                BinOp::Sub => {
                    lhs.fmt_child(f, 1)?;
                    write!(f, " - ")?;
                    rhs.fmt_child(f, 2)
                }
                BinOp::Mul => {
                    lhs.fmt_child(f, 2)?;
                    write!(f, "*")?;
                    rhs.fmt_child(f, 3)
                }
                BinOp::Div => {
                    lhs.fmt_child(f, 2)?;
                    write!(f, "/")?;
                    rhs.fmt_child(f, 3)
                }
                // the base of `^` must be an atom, so parenthesize anything
                // below constant/name/call precedence; the exponent is a factor
                BinOp::Pow => {
                    lhs.fmt_child(f, 5)?;
                    write!(f, "^")?;
                    rhs.fmt_child(f, 3)
                }
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Coordinate frame, base point and parameter table shared by a batch of jet
/// evaluations (all metric entries and the potential at one point).
pub struct EvalContext<'a> {
    coords: &'a [String],
    params: &'a BTreeMap<String, f64>,
    order: usize,
    seeds: Vec<Jet>,
}

impl<'a> EvalContext<'a> {
    pub fn new(
        coords: &'a [String],
        point: &[f64],
        order: usize,
        params: &'a BTreeMap<String, f64>,
    ) -> Result<Self, JetError> {
        assert_eq!(coords.len(), point.len(), "coordinate/point length mismatch");
        let seeds = seed_jets(point, order)?;
        Ok(EvalContext {
            coords,
            params,
            order,
            seeds,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn constant(&self, v: f64) -> Jet {
        Jet::constant(self.dim(), self.order, v)
    }

    fn lookup(&self, name: &str) -> Result<Jet, EvalError> {
        if let Some(i) = self.coords.iter().position(|c| c == name) {
            return Ok(self.seeds[i].clone());
        }
        if let Some(&v) = self.params.get(name) {
            return Ok(self.constant(v));
        }
        Err(EvalError::UnboundName(name.to_string()))
    }
}

fn jet_err(expr: &Expr, source: JetError) -> EvalError {
    EvalError::Jet {
        expr: expr.to_string(),
        source,
    }
}

/// Evaluate as a jet, exact to the context's order.
pub fn eval_jet(e: &Expr, ctx: &EvalContext) -> Result<Jet, EvalError> {
    match e {
        Expr::Constant(v) => Ok(ctx.constant(*v)),
        Expr::Name(n) => ctx.lookup(n),
        Expr::Neg(inner) => Ok(eval_jet(inner, ctx)?.neg()),
        Expr::Call(func, arg) => {
            let a = eval_jet(arg, ctx)?;
            match func {
                Func::Exp => Ok(a.exp()),
                Func::Sin => Ok(a.sin()),
                Func::Cos => Ok(a.cos()),
                Func::Log => a.log().map_err(|err| jet_err(e, err)),
                Func::Sqrt => a.sqrt().map_err(|err| jet_err(e, err)),
            }
        }
        Expr::Binary(op, lhs, rhs) => {
            let a = eval_jet(lhs, ctx)?;
            let b = eval_jet(rhs, ctx)?;
            match op {
                BinOp::Add => Ok(a.add(&b)),
                BinOp::Sub => Ok(a.sub(&b)),
                BinOp::Mul => Ok(a.mul(&b)),
                BinOp::Div => a.div(&b).map_err(|err| jet_err(e, err)),
                BinOp::Pow => pow_jet(&a, &b).map_err(|err| jet_err(e, err)),
            }
        }
    }
}

fn pow_jet(base: &Jet, exponent: &Jet) -> Result<Jet, JetError> {
    if exponent.is_constant() {
        let p = exponent.value();
        if p.fract() == 0.0 && p.abs() <= 1e9 {
            return base.pow_int(p as i64);
        }
        return base.pow_real(p);
    }
    // variable exponent: u^v = exp(v log u), requires u > 0
    Ok(exponent.mul(&base.log()?).exp())
}

/// Plain `f64` evaluation (no derivative data). Matches order-0 `eval_jet`
/// up to floating-point associativity of the division path.
pub fn eval_f64(
    e: &Expr,
    coords: &[String],
    point: &[f64],
    params: &BTreeMap<String, f64>,
) -> Result<f64, EvalError> {
    match e {
        Expr::Constant(v) => Ok(*v),
        Expr::Name(n) => {
            if let Some(i) = coords.iter().position(|c| c == n) {
                return Ok(point[i]);
            }
            params
                .get(n)
                .copied()
                .ok_or_else(|| EvalError::UnboundName(n.clone()))
        }
        Expr::Neg(inner) => Ok(-eval_f64(inner, coords, point, params)?),
        Expr::Call(func, arg) => {
            let a = eval_f64(arg, coords, point, params)?;
            Ok(match func {
                Func::Exp => a.exp(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Log => {
                    if a <= 0.0 {
                        return Err(jet_err(e, JetError::Domain { op: "log", value: a }));
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if a <= 0.0 {
                        return Err(jet_err(e, JetError::Domain { op: "sqrt", value: a }));
                    }
                    a.sqrt()
                }
            })
        }
        Expr::Binary(op, lhs, rhs) => {
            let a = eval_f64(lhs, coords, point, params)?;
            let b = eval_f64(rhs, coords, point, params)?;
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => Ok(a * b),
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(jet_err(e, JetError::Domain { op: "div", value: b }));
                    }
                    Ok(a / b)
                }
                BinOp::Pow => pow_f64(a, b).map_err(|err| jet_err(e, err)),
            }
        }
    }
}

fn pow_f64(a: f64, b: f64) -> Result<f64, JetError> {
    if b.fract() == 0.0 && b.abs() <= 1e9 {
        if b < 0.0 && a == 0.0 {
            return Err(JetError::Domain { op: "div", value: a });
        }
        // repeated squaring, mirroring the jet path
        let mut acc = 1.0f64;
        let mut base = if b < 0.0 { 1.0 / a } else { a };
        let mut n = b.abs() as i64;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            n >>= 1;
            if n > 0 {
                base *= base;
            }
        }
        Ok(acc)
    } else {
        if a <= 0.0 {
            return Err(JetError::Domain {
                op: "pow_real",
                value: a,
            });
        }
        Ok(a.powf(b))
    }
}

impl Expr {
    /// Every name occurring in the tree.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Constant(_) => {}
            Expr::Name(n) => {
                out.insert(n.clone());
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_names(out),
            Expr::Binary(_, a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
        }
    }

    /// Bind-time check: every name must be a declared coordinate or parameter.
    pub fn check_bound(
        &self,
        coords: &[String],
        params: &BTreeMap<String, f64>,
    ) -> Result<(), EvalError> {
        for n in self.names() {
            if !coords.contains(&n) && !params.contains_key(&n) {
                return Err(EvalError::UnboundName(n));
            }
        }
        Ok(())
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Add, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Sub, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Mul, Box::new(self), Box::new(rhs))
    }
}
