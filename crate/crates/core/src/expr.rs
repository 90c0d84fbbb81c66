//! A small arithmetic expression language for user-supplied Hamiltonians and
//! Lagrangians.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right associative
//! primary := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! so `-x^2` is `-(x^2)` and `2^3^2` is `2^(3^2)`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};

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
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    /// Index into the expression's variable signature.
    Var(usize),
    /// Index into the expression's parameter list.
    Param(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with the symbol tables it was parsed against.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    vars: Vec<String>,
    params: Vec<String>,
}

impl Expr {
    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn parameters(&self) -> &[String] {
        &self.params
    }

    /// Builds an expression from an already-formed tree.
    pub fn from_node(root: Node, vars: Vec<String>, params: Vec<String>) -> Self {
        Expr { root, vars, params }
    }

    /// Evaluates over any scalar type. `vars` and `params` are in signature
    /// order.
    pub fn eval_with<S: Scalar>(&self, vars: &[S], params: &[f64]) -> Result<S> {
        if vars.len() != self.vars.len() {
            return Err(Error::DimensionMismatch { expected: self.vars.len(), actual: vars.len() });
        }
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                actual: params.len(),
            });
        }
        let out = eval_node(&self.root, vars, params)?;
        if !out.value().is_finite() {
            return Err(Error::Domain("non-finite result".into()));
        }
        Ok(out)
    }

    pub fn eval(&self, vars: &[f64], params: &[f64]) -> Result<f64> {
        self.eval_with(vars, params)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, &self.vars, &self.params)
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, n: &Node, vars: &[String], params: &[String]) -> fmt::Result {
    match n {
        Node::Num(v) => write!(f, "{v:?}"),
        Node::Var(i) => f.write_str(&vars[*i]),
        Node::Param(i) => f.write_str(&params[*i]),
        Node::Neg(a) => {
            f.write_str("(-")?;
            write_node(f, a, vars, params)?;
            f.write_str(")")
        }
        Node::Bin(op, a, b) => {
            f.write_str("(")?;
            write_node(f, a, vars, params)?;
            write!(f, " {} ", op.symbol())?;
            write_node(f, b, vars, params)?;
            f.write_str(")")
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a, vars, params)?;
            f.write_str(")")
        }
    }
}

fn integer_exponent(n: &Node) -> Option<i32> {
    let v = match n {
        Node::Num(v) => *v,
        Node::Neg(inner) => match inner.as_ref() {
            Node::Num(v) => -*v,
            _ => return None,
        },
        _ => return None,
    };
    (v.fract() == 0.0 && v.abs() <= i32::MAX as f64).then_some(v as i32)
}

fn is_constant(n: &Node) -> bool {
    match n {
        Node::Num(_) | Node::Param(_) => true,
        Node::Var(_) => false,
        Node::Neg(a) | Node::Call(_, a) => is_constant(a),
        Node::Bin(_, a, b) => is_constant(a) && is_constant(b),
    }
}

fn eval_node<S: Scalar>(n: &Node, vars: &[S], params: &[f64]) -> Result<S> {
    Ok(match n {
        Node::Num(v) => S::constant(*v),
        Node::Var(i) => vars[*i].clone(),
        Node::Param(i) => S::constant(params[*i]),
        Node::Neg(a) => -eval_node(a, vars, params)?,
        Node::Bin(op, a, b) => {
            if *op == BinOp::Pow {
                return eval_pow(a, b, vars, params);
            }
            let x = eval_node(a, vars, params)?;
            let y = eval_node(b, vars, params)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y.value() == 0.0 {
                        return Err(Error::Domain("division by zero".into()));
                    }
                    x / y
                }
                BinOp::Pow => unreachable!(),
            }
        }
        Node::Call(func, a) => {
            let x = eval_node(a, vars, params)?;
            let v = x.value();
            match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if v <= 0.0 {
                        return Err(Error::Domain(format!("log of non-positive value {v}")));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(Error::Domain(format!("sqrt of negative value {v}")));
                    }
                    x.sqrt()
                }
                Func::Abs => x.abs(),
            }
        }
    })
}

fn eval_pow<S: Scalar>(base: &Node, exponent: &Node, vars: &[S], params: &[f64]) -> Result<S> {
    let b = eval_node(base, vars, params)?;
    let bv = b.value();
    if let Some(k) = integer_exponent(exponent) {
        if bv == 0.0 && k < 0 {
            return Err(Error::Domain("zero raised to a negative power".into()));
        }
        return Ok(b.powi(k));
    }
    let e = eval_node(exponent, vars, params)?;
    let ev = e.value();
    if is_constant(exponent) && ev.fract() == 0.0 && ev.abs() <= i32::MAX as f64 {
        if bv == 0.0 && ev < 0.0 {
            return Err(Error::Domain("zero raised to a negative power".into()));
        }
        return Ok(b.powi(ev as i32));
    }
    if bv > 0.0 {
        return Ok((e * b.ln()).exp());
    }
    if bv == 0.0 {
        if let Node::Num(c) = exponent {
            if *c > 0.0 {
                return Ok(b.powf(*c));
            }
        }
        return Err(Error::Domain(format!("0 ^ {ev} is not differentiable here")));
    }
    Err(Error::Domain(format!("negative base {bv} with non-integer exponent")))
}

/// Parses `source` against a variable signature and a parameter list.
pub fn parse(source: &str, signature: &[&str], params: &[&str]) -> Result<Expr> {
    let mut p = Parser { src: source.as_bytes(), pos: 0, signature, params };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(&["operator", "end of input"]));
    }
    Ok(Expr {
        root,
        vars: signature.iter().map(|s| s.to_string()).collect(),
        params: params.iter().map(|s| s.to_string()).collect(),
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    signature: &'a [&'a str],
    params: &'a [&'a str],
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn syntax(&self, expected: &[&str]) -> Error {
        Error::Syntax { position: self.pos, expected: expected.iter().map(|s| s.to_string()).collect() }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let exponent = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax(&[")"]));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            _ => Err(self.syntax(&["number", "identifier", "("])),
        }
    }

    fn number(&mut self) -> Result<Node> {
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
            self.pos = start;
            return Err(self.syntax(&["digit"]));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
                return Err(self.syntax(&["exponent digits"]));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Node::Num).map_err(|_| {
            self.pos = start;
            self.syntax(&["number"])
        })
    }

    fn identifier(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if let Some(i) = self.signature.iter().position(|s| *s == name) {
            return Ok(Node::Var(i));
        }
        if let Some(i) = self.params.iter().position(|s| *s == name) {
            return Ok(Node::Param(i));
        }
        if let Some(func) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.syntax(&["("]));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.syntax(&[")"]));
            }
            return Ok(Node::Call(func, Box::new(arg)));
        }
        Err(Error::UnknownSymbol(name.to_string()))
    }
}

/// Evaluates value, gradient and Hessian with respect to the expression's
/// declared variables. Every declared variable and parameter must be bound.
pub fn eval_jet2(
    e: &Expr,
    assignment: &HashMap<String, f64>,
    params: &HashMap<String, f64>,
) -> Result<Jet> {
    let point = e
        .vars
        .iter()
        .map(|v| assignment.get(v).copied().ok_or_else(|| Error::Unbound(v.clone())))
        .collect::<Result<Vec<_>>>()?;
    let pvals = e
        .params
        .iter()
        .map(|p| params.get(p).copied().ok_or_else(|| Error::Unbound(p.clone())))
        .collect::<Result<Vec<_>>>()?;
    let jet = e.eval_with(&Jet::seed(&point), &pvals)?;
    if !jet.is_finite() {
        return Err(Error::Domain("non-finite derivative".into()));
    }
    Ok(jet)
}

/// Variable names for a Hamiltonian over `(x, p, z)` in dimension `n`.
pub fn hamiltonian_signature(n: usize) -> Vec<String> {
    signature(n, "p", "z")
}

/// Variable names for a Lagrangian over `(x, xd, t)`.
pub fn lagrangian_signature(n: usize) -> Vec<String> {
    signature(n, "xd", "t")
}

/// Variable names for a Herglotz Lagrangian over `(x, xd, z)`.
pub fn herglotz_signature(n: usize) -> Vec<String> {
    signature(n, "xd", "z")
}

fn signature(n: usize, fiber: &str, last: &str) -> Vec<String> {
    (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("{fiber}{i}")))
        .chain(std::iter::once(last.to_string()))
        .collect()
}
