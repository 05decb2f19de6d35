//! Univariate real expressions: lexer, recursive-descent parser, evaluator.
//!
//! Grammar (whitespace is ignored between tokens):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-"? power
//! power  := atom ("^" factor)?
//! atom   := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! `x` is the variable, `ln exp sin cos abs sqrt pow` are reserved function
//! names, and every other identifier is a named parameter resolved through
//! [`ParamBindings`] at evaluation time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Exponents closer than this to an integer are treated as integers, which
/// allows negative bases.
pub const INTEGRAL_EXPONENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Ln,
    Exp,
    Sin,
    Cos,
    Abs,
    Sqrt,
    Pow,
}

impl Builtin {
    pub const ALL: [Builtin; 7] = [
        Builtin::Ln,
        Builtin::Exp,
        Builtin::Sin,
        Builtin::Cos,
        Builtin::Abs,
        Builtin::Sqrt,
        Builtin::Pow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Ln => "ln",
            Builtin::Exp => "exp",
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Abs => "abs",
            Builtin::Sqrt => "sqrt",
            Builtin::Pow => "pow",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Pow => 2,
            _ => 1,
        }
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var,
    Param(String),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Builtin, Vec<Node>),
}

impl fmt::Display for Node {
    // Fully parenthesized so that re-parsing reproduces the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var => f.write_str("x"),
            Node::Param(name) => f.write_str(name),
            Node::Neg(inner) => write!(f, "(-{inner})"),
            Node::Binary(op, lhs, rhs) => write!(f, "({lhs} {} {rhs})", op.symbol()),
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{arg}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A parsed function of one real variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncExpr {
    root: Node,
}

impl FuncExpr {
    pub fn parse(source: &str) -> Result<FuncExpr, ParseError> {
        Parser::new(source)?.parse_all()
    }

    pub fn from_node(root: Node) -> FuncExpr {
        FuncExpr { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Names of all parameters referenced by the expression.
    pub fn params(&self) -> BTreeSet<String> {
        fn walk(node: &Node, out: &mut BTreeSet<String>) {
            match node {
                Node::Param(name) => {
                    out.insert(name.clone());
                }
                Node::Neg(inner) => walk(inner, out),
                Node::Binary(_, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                Node::Call(_, args) => args.iter().for_each(|a| walk(a, out)),
                Node::Num(_) | Node::Var => {}
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.root, &mut out);
        out
    }

    pub fn evaluate(&self, x: f64, bindings: &ParamBindings) -> Result<f64, EvalError> {
        eval_node(&self.root, x, bindings)
    }

    /// Substitutes every parameter, producing a closed function of `x`.
    pub fn bind(&self, bindings: &ParamBindings) -> Result<BoundExpr, EvalError> {
        fn subst(node: &Node, bindings: &ParamBindings) -> Result<Node, EvalError> {
            Ok(match node {
                Node::Param(name) => match bindings.get(name) {
                    Some(v) => Node::Num(v),
                    None => {
                        return Err(EvalError::new(
                            EvalErrorKind::UnboundParameter(name.clone()),
                            f64::NAN,
                            node,
                        ))
                    }
                },
                Node::Num(v) => Node::Num(*v),
                Node::Var => Node::Var,
                Node::Neg(inner) => Node::Neg(Box::new(subst(inner, bindings)?)),
                Node::Binary(op, l, r) => Node::Binary(
                    *op,
                    Box::new(subst(l, bindings)?),
                    Box::new(subst(r, bindings)?),
                ),
                Node::Call(func, args) => Node::Call(
                    *func,
                    args.iter()
                        .map(|a| subst(a, bindings))
                        .collect::<Result<_, _>>()?,
                ),
            })
        }
        Ok(BoundExpr {
            source: self.clone(),
            closed: subst(&self.root, bindings)?,
        })
    }
}

impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl FromStr for FuncExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FuncExpr::parse(s)
    }
}

/// An expression with all parameters substituted.
#[derive(Debug, Clone)]
pub struct BoundExpr {
    source: FuncExpr,
    closed: Node,
}

impl BoundExpr {
    pub fn source(&self) -> &FuncExpr {
        &self.source
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        eval_node(&self.closed, x, &EMPTY_BINDINGS)
    }
}

/// A real function of one variable that may fail with a domain error.
pub trait Univariate: Sync {
    fn eval(&self, x: f64) -> Result<f64, EvalError>;
}

impl<T: Univariate + ?Sized> Univariate for &T {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        (**self).eval(x)
    }
}

impl<T: Univariate + ?Sized> Univariate for Box<T> {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        (**self).eval(x)
    }
}

/// Adapts a closure into a [`Univariate`].
#[derive(Clone, Copy)]
pub struct FnUnivariate<F>(pub F);

impl<F> Univariate for FnUnivariate<F>
where
    F: Fn(f64) -> Result<f64, EvalError> + Sync,
{
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        (self.0)(x)
    }
}

pub fn from_fn<F>(f: F) -> FnUnivariate<F>
where
    F: Fn(f64) -> Result<f64, EvalError> + Sync,
{
    FnUnivariate(f)
}

impl Univariate for BoundExpr {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        BoundExpr::eval(self, x)
    }
}

/// Parameter name to value table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamBindings {
    values: BTreeMap<String, f64>,
}

static EMPTY_BINDINGS: ParamBindings = ParamBindings {
    values: BTreeMap::new(),
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BindingError {
    #[error("`{0}` is not a valid parameter name")]
    InvalidName(String),
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: String, value: f64 },
}

impl ParamBindings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces a binding.
    pub fn insert(&mut self, name: &str, value: f64) -> Result<(), BindingError> {
        if !is_parameter_name(name) {
            return Err(BindingError::InvalidName(name.to_string()));
        }
        if !value.is_finite() {
            return Err(BindingError::NonFinite {
                name: name.to_string(),
                value,
            });
        }
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    pub fn with(mut self, name: &str, value: f64) -> Result<Self, BindingError> {
        self.insert(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn is_parameter_name(name: &str) -> bool {
    let mut chars = name.chars();
    let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic());
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && name != "x"
        && Builtin::from_name(name).is_none()
}

// ---------------------------------------------------------------------------
// Evaluation

#[derive(Debug, Clone, PartialEq)]
pub enum EvalErrorKind {
    UnboundParameter(String),
    Domain(String),
}

/// Evaluation failure with the offending `x`, the failing sub-expression and
/// its path from the root (child indices).
#[derive(Debug, Clone, PartialEq, Error)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub x: f64,
    pub subexpr: String,
    pub path: Vec<usize>,
}

impl EvalError {
    fn new(kind: EvalErrorKind, x: f64, node: &Node) -> Self {
        EvalError {
            kind,
            x,
            subexpr: node.to_string(),
            path: Vec::new(),
        }
    }

    /// Error raised by a non-expression callable (transform, substitution).
    pub fn domain(message: impl Into<String>, x: f64) -> Self {
        EvalError {
            kind: EvalErrorKind::Domain(message.into()),
            x,
            subexpr: String::new(),
            path: Vec::new(),
        }
    }

    fn within(mut self, child: usize) -> Self {
        self.path.insert(0, child);
        self
    }

    pub fn path_string(&self) -> String {
        let mut s = String::from("root");
        for i in &self.path {
            s.push('.');
            s.push_str(&i.to_string());
        }
        s
    }
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EvalErrorKind::UnboundParameter(name) => write!(f, "unbound parameter `{name}`"),
            EvalErrorKind::Domain(msg) => {
                write!(f, "domain error at x = {:?}: {msg}", self.x)?;
                if !self.subexpr.is_empty() {
                    write!(f, " in `{}` ({})", self.subexpr, self.path_string())?;
                }
                Ok(())
            }
        }
    }
}

fn domain(msg: &str, x: f64, node: &Node) -> EvalError {
    EvalError::new(EvalErrorKind::Domain(msg.to_string()), x, node)
}

fn real_pow(base: f64, exponent: f64, x: f64, node: &Node) -> Result<f64, EvalError> {
    let nearest = exponent.round();
    let integral = (exponent - nearest).abs() <= INTEGRAL_EXPONENT_TOL;
    if base == 0.0 && exponent < 0.0 {
        return Err(domain("zero raised to a negative power", x, node));
    }
    if integral {
        Ok(base.powf(nearest))
    } else if base < 0.0 {
        Err(domain("negative base with non-integer exponent", x, node))
    } else {
        Ok(base.powf(exponent))
    }
}

fn eval_node(node: &Node, x: f64, env: &ParamBindings) -> Result<f64, EvalError> {
    let value = match node {
        Node::Num(v) => *v,
        Node::Var => x,
        Node::Param(name) => env.get(name).ok_or_else(|| {
            EvalError::new(EvalErrorKind::UnboundParameter(name.clone()), x, node)
        })?,
        Node::Neg(inner) => -eval_node(inner, x, env).map_err(|e| e.within(0))?,
        Node::Binary(op, l, r) => {
            let lhs = eval_node(l, x, env).map_err(|e| e.within(0))?;
            let rhs = eval_node(r, x, env).map_err(|e| e.within(1))?;
            match op {
                BinOp::Add => lhs + rhs,
                BinOp::Sub => lhs - rhs,
                BinOp::Mul => lhs * rhs,
                BinOp::Div => {
                    if rhs == 0.0 {
                        return Err(domain("division by zero", x, node));
                    }
                    lhs / rhs
                }
                BinOp::Pow => real_pow(lhs, rhs, x, node)?,
            }
        }
        Node::Call(func, args) => {
            let a = eval_node(&args[0], x, env).map_err(|e| e.within(0))?;
            match func {
                Builtin::Ln => {
                    if a <= 0.0 {
                        return Err(domain("logarithm of a non-positive value", x, node));
                    }
                    a.ln()
                }
                Builtin::Exp => a.exp(),
                Builtin::Sin => a.sin(),
                Builtin::Cos => a.cos(),
                Builtin::Abs => a.abs(),
                Builtin::Sqrt => {
                    if a < 0.0 {
                        return Err(domain("square root of a negative value", x, node));
                    }
                    a.sqrt()
                }
                Builtin::Pow => {
                    let e = eval_node(&args[1], x, env).map_err(|e| e.within(1))?;
                    real_pow(a, e, x, node)?
                }
            }
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain("non-finite value", x, node))
    }
}

// ---------------------------------------------------------------------------
// Lexing and parsing

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: found {found}, expected one of {}", expected.join(", "))]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<&'static str>,
    },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("function `{name}` at byte {offset} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("numeric literal `{literal}` at byte {offset} is not a finite real")]
    BadNumber { literal: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::Arity { offset, .. }
            | ParseError::BadNumber { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, start));
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
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
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let literal = &src[start..i];
            let value: f64 = literal.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                found: format!("`{literal}`"),
                expected: vec!["number"],
            })?;
            if !value.is_finite() {
                return Err(ParseError::BadNumber {
                    literal: literal.to_string(),
                    offset: start,
                });
            }
            out.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(ParseError::Syntax {
                offset: start,
                found: format!("character `{ch}`"),
                expected: vec!["number", "identifier", "(", "-"],
            });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

const ATOM_START: [&str; 4] = ["number", "identifier", "(", "-"];

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            found: self.peek().describe(),
            expected: expected.to_vec(),
        }
    }

    fn parse_all(mut self) -> Result<FuncExpr, ParseError> {
        let root = self.expr()?;
        if *self.peek() != Tok::End {
            return Err(self.unexpected(&["+", "-", "*", "/", "^", "end of input"]));
        }
        Ok(FuncExpr { root })
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            Ok(Node::Neg(Box::new(self.power()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_close(&["+", "-", "*", "/", "^", ")"])?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.call(name, offset)
                } else if name == "x" {
                    Ok(Node::Var)
                } else if let Some(func) = Builtin::from_name(&name) {
                    // Reserved name used without arguments.
                    Err(ParseError::Arity {
                        name: func.name().to_string(),
                        offset,
                        expected: func.arity(),
                        found: 0,
                    })
                } else {
                    Ok(Node::Param(name))
                }
            }
            _ => Err(self.unexpected(&ATOM_START[..3])),
        }
    }

    fn call(&mut self, name: String, offset: usize) -> Result<Node, ParseError> {
        let func = Builtin::from_name(&name).ok_or(ParseError::UnknownFunction {
            name: name.clone(),
            offset,
        })?;
        self.bump(); // (
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect_close(&["+", "-", "*", "/", "^", ",", ")"])?;
        if args.len() != func.arity() {
            return Err(ParseError::Arity {
                name,
                offset,
                expected: func.arity(),
                found: args.len(),
            });
        }
        Ok(Node::Call(func, args))
    }

    fn expect_close(&mut self, expected: &[&'static str]) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }
}
