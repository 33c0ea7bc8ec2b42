//! Right-hand-side expression language: parsing, evaluation, symbolic
//! partial derivatives.
//!
//! The grammar is deliberately small. Binary `+ - * / ^` with `^` binding
//! tightest and associating right, unary minus between `^` and `* /`, the
//! functions `gamma` and `sqrt`, the constant `pi`, and no implicit
//! multiplication:
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" unary)?
//! atom  := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//! ```
//!
//! So `-2^2` is `-(2^2) = -4` and `2^3^2` is `2^(3^2) = 512`.

use crate::basis::gamma;
use crate::error::{Error, Result};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Gamma,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Gamma => "gamma",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Expression tree. `Var("pi")` resolves to the constant at evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Number(f64),
    Var(String),
    Neg(Box<ExprAst>),
    Binary {
        op: BinOp,
        lhs: Box<ExprAst>,
        rhs: Box<ExprAst>,
    },
    Call {
        func: Func,
        arg: Box<ExprAst>,
    },
}

/// Variable bindings for evaluation. Names are unique; `set` on an existing
/// name replaces its value. `pi` cannot be shadowed.
#[derive(Debug, Clone, Default)]
pub struct Env<'n> {
    entries: Vec<(&'n str, f64)>,
}

impl<'n> Env<'n> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &'n str, value: f64) {
        for entry in &mut self.entries {
            if entry.0 == name {
                entry.1 = value;
                return;
            }
        }
        self.entries.push((name, value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

/// Parses expression text into an AST. Errors carry the byte offset of the
/// offending token.
pub fn parse(src: &str) -> Result<ExprAst> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.at_end() {
        return Err(Error::Parse { offset: 0, message: "empty expression".into() });
    }
    let ast = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(Error::Parse {
            offset: p.pos,
            message: "expected an operator or end of input".into(),
        });
    }
    Ok(ast)
}

struct Parser<'s> {
    src: &'s [u8],
    pos: usize,
}

impl<'s> Parser<'s> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn error(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse { offset, message: message.into() }
    }

    fn expr(&mut self) -> Result<ExprAst> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = ExprAst::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprAst> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = ExprAst::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExprAst> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(ExprAst::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(ExprAst::Binary {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exp),
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.error(self.pos, "unbalanced parenthesis: expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.error(
                self.pos,
                "expected a number, variable, function call, or parenthesized expression",
            )),
        }
    }

    fn number(&mut self) -> Result<ExprAst> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                return Err(self.error(start, "malformed number: expected digits after `.`"));
            }
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                return Err(self.error(start, "malformed number: expected digits in exponent"));
            }
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        let value: f64 = text
            .parse()
            .map_err(|_| self.error(start, format!("malformed number `{text}`")))?;
        if !value.is_finite() {
            return Err(self.error(start, format!("number literal `{text}` overflows f64")));
        }
        Ok(ExprAst::Number(value))
    }

    fn ident(&mut self) -> Result<ExprAst> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        self.skip_ws();
        if self.peek() == Some(b'(') {
            let func = match name {
                "gamma" => Func::Gamma,
                "sqrt" => Func::Sqrt,
                _ => return Err(self.error(start, format!("unknown function `{name}`"))),
            };
            self.pos += 1;
            let arg = self.expr()?;
            self.skip_ws();
            if self.peek() != Some(b')') {
                return Err(self.error(self.pos, "unbalanced parenthesis: expected `)`"));
            }
            self.pos += 1;
            return Ok(ExprAst::Call { func, arg: Box::new(arg) });
        }
        Ok(ExprAst::Var(name.to_string()))
    }
}

/// Evaluates an AST against an environment.
///
/// Division by exact zero, square roots of negative values, and gamma poles
/// and overflows are reported as errors rather than producing infinities.
/// `0^0` evaluates to 1.
pub fn eval(ast: &ExprAst, env: &Env) -> Result<f64> {
    match ast {
        ExprAst::Number(v) => Ok(*v),
        ExprAst::Var(name) => {
            if name == "pi" {
                return Ok(std::f64::consts::PI);
            }
            env.get(name).ok_or_else(|| Error::UnboundVariable(name.clone()))
        }
        ExprAst::Neg(inner) => Ok(-eval(inner, env)?),
        ExprAst::Binary { op, lhs, rhs } => {
            let l = eval(lhs, env)?;
            let r = eval(rhs, env)?;
            match op {
                BinOp::Add => Ok(l + r),
                BinOp::Sub => Ok(l - r),
                BinOp::Mul => Ok(l * r),
                BinOp::Div => {
                    if r == 0.0 {
                        return Err(Error::DivisionByZero);
                    }
                    Ok(l / r)
                }
                BinOp::Pow => Ok(l.powf(r)),
            }
        }
        ExprAst::Call { func, arg } => {
            let v = eval(arg, env)?;
            match func {
                Func::Gamma => gamma(v),
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(Error::SqrtOfNegative(v));
                    }
                    Ok(v.sqrt())
                }
            }
        }
    }
}

/// True iff `var` occurs as a variable anywhere in the tree.
pub fn contains_var(ast: &ExprAst, var: &str) -> bool {
    match ast {
        ExprAst::Number(_) => false,
        ExprAst::Var(name) => name == var,
        ExprAst::Neg(inner) => contains_var(inner, var),
        ExprAst::Binary { lhs, rhs, .. } => contains_var(lhs, var) || contains_var(rhs, var),
        ExprAst::Call { arg, .. } => contains_var(arg, var),
    }
}

/// All variable names in the tree except the constant `pi`, sorted.
pub fn variables(ast: &ExprAst) -> BTreeSet<String> {
    fn walk(ast: &ExprAst, out: &mut BTreeSet<String>) {
        match ast {
            ExprAst::Number(_) => {}
            ExprAst::Var(name) => {
                if name != "pi" {
                    out.insert(name.clone());
                }
            }
            ExprAst::Neg(inner) => walk(inner, out),
            ExprAst::Binary { lhs, rhs, .. } => {
                walk(lhs, out);
                walk(rhs, out);
            }
            ExprAst::Call { arg, .. } => walk(arg, out),
        }
    }
    let mut out = BTreeSet::new();
    walk(ast, &mut out);
    out
}

/// Deep copy with every `Var(from)` replaced by `Var(to)`.
pub fn rename_var(ast: &ExprAst, from: &str, to: &str) -> ExprAst {
    match ast {
        ExprAst::Number(v) => ExprAst::Number(*v),
        ExprAst::Var(name) => {
            if name == from {
                ExprAst::Var(to.to_string())
            } else {
                ExprAst::Var(name.clone())
            }
        }
        ExprAst::Neg(inner) => ExprAst::Neg(Box::new(rename_var(inner, from, to))),
        ExprAst::Binary { op, lhs, rhs } => ExprAst::Binary {
            op: *op,
            lhs: Box::new(rename_var(lhs, from, to)),
            rhs: Box::new(rename_var(rhs, from, to)),
        },
        ExprAst::Call { func, arg } => ExprAst::Call {
            func: *func,
            arg: Box::new(rename_var(arg, from, to)),
        },
    }
}

/// Symbolic partial derivative with respect to `var`.
///
/// Covers sums, products, quotients, negation, and powers `u^c` where the
/// exponent subtree does not mention `var` (the power rule
/// `c * u^(c-1) * u'`). A `var` inside a function argument or an exponent is
/// an [`Error::UnsupportedDerivative`]. Subtrees free of `var` differentiate
/// to zero regardless of shape. Results are not simplified.
pub fn diff(ast: &ExprAst, var: &str) -> Result<ExprAst> {
    if !contains_var(ast, var) {
        return Ok(ExprAst::Number(0.0));
    }
    match ast {
        // contains_var holds, so this is exactly `var`.
        ExprAst::Var(_) => Ok(ExprAst::Number(1.0)),
        ExprAst::Number(_) => unreachable!("numbers contain no variables"),
        ExprAst::Neg(inner) => Ok(ExprAst::Neg(Box::new(diff(inner, var)?))),
        ExprAst::Binary { op, lhs, rhs } => match op {
            BinOp::Add | BinOp::Sub => Ok(ExprAst::Binary {
                op: *op,
                lhs: Box::new(diff(lhs, var)?),
                rhs: Box::new(diff(rhs, var)?),
            }),
            BinOp::Mul => {
                let dl = diff(lhs, var)?;
                let dr = diff(rhs, var)?;
                Ok(binary(
                    BinOp::Add,
                    binary(BinOp::Mul, dl, (**rhs).clone()),
                    binary(BinOp::Mul, (**lhs).clone(), dr),
                ))
            }
            BinOp::Div => {
                let dl = diff(lhs, var)?;
                let dr = diff(rhs, var)?;
                let num = binary(
                    BinOp::Sub,
                    binary(BinOp::Mul, dl, (**rhs).clone()),
                    binary(BinOp::Mul, (**lhs).clone(), dr),
                );
                let den = binary(BinOp::Pow, (**rhs).clone(), ExprAst::Number(2.0));
                Ok(binary(BinOp::Div, num, den))
            }
            BinOp::Pow => {
                if contains_var(rhs, var) {
                    return Err(Error::UnsupportedDerivative(format!(
                        "variable `{var}` occurs in an exponent"
                    )));
                }
                // c * u^(c-1) * u'
                let c_minus_one =
                    binary(BinOp::Sub, (**rhs).clone(), ExprAst::Number(1.0));
                let power = binary(BinOp::Pow, (**lhs).clone(), c_minus_one);
                let du = diff(lhs, var)?;
                Ok(binary(
                    BinOp::Mul,
                    binary(BinOp::Mul, (**rhs).clone(), power),
                    du,
                ))
            }
        },
        ExprAst::Call { func, .. } => Err(Error::UnsupportedDerivative(format!(
            "variable `{var}` occurs inside {}(...)",
            func.name()
        ))),
    }
}

fn binary(op: BinOp, lhs: ExprAst, rhs: ExprAst) -> ExprAst {
    ExprAst::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
}

/// Fully parenthesized rendering that reparses to a structurally equal tree
/// when every literal is finite and nonnegative. Negative literals print as
/// `(-v)`, which reparses as negation (same value, different tree).
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Number(v) => {
                if v.is_sign_negative() {
                    write!(f, "(-{})", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            ExprAst::Var(name) => write!(f, "{name}"),
            ExprAst::Neg(inner) => write!(f, "(-{inner})"),
            ExprAst::Binary { op, lhs, rhs } => {
                write!(f, "({lhs} {} {rhs})", op.symbol())
            }
            ExprAst::Call { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}
