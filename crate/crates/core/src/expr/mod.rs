//! Scalar expressions over coordinates, velocities and parameters.
//!
//! Expressions are parsed against a [`Scope`], which fixes the coordinate and
//! parameter names of a model. The velocity of coordinate `theta` is spelled
//! `dtheta`. Every variable leaf carries its slot index so that evaluation at
//! a state does not need name lookups.
//!
//! ```
//! use nonholonomic::expr::{Scope, Bindings};
//!
//! let scope = Scope::new(&["x", "theta", "phi"], &["R"]).unwrap();
//! let psi = scope.parse("dx - R*cos(theta)*dphi").unwrap();
//! let b = Bindings::from_pairs(&[("dx", 2.0), ("R", 1.0), ("theta", 0.0), ("dphi", 2.0)]);
//! assert_eq!(psi.eval(&b).unwrap(), 0.0);
//! ```

mod diff;
mod parser;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub use parser::parse;

/// Errors raised while building, parsing, evaluating or differentiating expressions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("domain error: {function}({argument})")]
    Domain { function: &'static str, argument: f64 },
    #[error("unknown variable `{0}` (expected a coordinate or velocity)")]
    UnknownVariable(String),
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("name `{0}` is declared twice or clashes with a velocity name")]
    DuplicateName(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Coordinate,
    Velocity,
    Parameter,
}

/// A resolved variable leaf. `index` is the coordinate index for coordinates
/// and velocities, and the parameter index for parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    pub kind: VarKind,
    pub name: String,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl UnaryOp {
    pub(crate) fn from_function_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "tan" => Self::Tan,
            "exp" => Self::Exp,
            "log" | "ln" => Self::Log,
            "sqrt" => Self::Sqrt,
            _ => return None,
        })
    }

    fn function_name(self) -> &'static str {
        match self {
            Self::Neg => "-",
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Tan => "tan",
            Self::Exp => "exp",
            Self::Log => "log",
            Self::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            Self::Add => '+',
            Self::Sub => '-',
            Self::Mul => '*',
            Self::Div => '/',
            Self::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Constant(f64),
    Variable(Variable),
    Unary(UnaryOp, Box<Expression>),
    Binary(BinaryOp, Box<Expression>, Box<Expression>),
}

/// Source of variable values during evaluation.
pub trait Env {
    fn value(&self, var: &Variable) -> Result<f64, ExprError>;
}

/// Name-to-value bindings. Missing names are an error, never a default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings {
    values: HashMap<String, f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Self {
        let mut b = Self::new();
        for (name, value) in pairs {
            b.set(name, *value);
        }
        b
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

impl Env for Bindings {
    fn value(&self, var: &Variable) -> Result<f64, ExprError> {
        self.get(&var.name)
            .ok_or_else(|| ExprError::UnboundVariable(var.name.clone()))
    }
}

/// Index-based environment: coordinates, velocities and parameter values by slot.
#[derive(Debug, Clone, Copy)]
pub struct SlotEnv<'a> {
    pub q: &'a [f64],
    pub v: &'a [f64],
    pub params: &'a [f64],
}

impl Env for SlotEnv<'_> {
    fn value(&self, var: &Variable) -> Result<f64, ExprError> {
        let slot = match var.kind {
            VarKind::Coordinate => self.q.get(var.index),
            VarKind::Velocity => self.v.get(var.index),
            VarKind::Parameter => self.params.get(var.index),
        };
        slot.copied()
            .ok_or_else(|| ExprError::UnboundVariable(var.name.clone()))
    }
}

const RESERVED: &[&str] = &["sin", "cos", "tan", "exp", "log", "ln", "sqrt"];

/// Name tables of one model: coordinates (and their `d`-prefixed velocities)
/// and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scope {
    coords: Vec<String>,
    params: Vec<String>,
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Scope {
    pub fn new<S: AsRef<str>>(coords: &[S], params: &[S]) -> Result<Self, ExprError> {
        let coords: Vec<String> = coords.iter().map(|s| s.as_ref().to_string()).collect();
        let params: Vec<String> = params.iter().map(|s| s.as_ref().to_string()).collect();
        let mut seen = BTreeSet::new();
        let all = coords
            .iter()
            .cloned()
            .chain(coords.iter().map(|c| format!("d{c}")))
            .chain(params.iter().cloned());
        for name in all {
            if !is_identifier(&name) || RESERVED.contains(&name.as_str()) {
                return Err(ExprError::InvalidName(name));
            }
            if !seen.insert(name.clone()) {
                return Err(ExprError::DuplicateName(name));
            }
        }
        Ok(Self { coords, params })
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn resolve(&self, name: &str) -> Option<Variable> {
        if let Some(i) = self.coords.iter().position(|c| c == name) {
            return Some(Variable {
                kind: VarKind::Coordinate,
                name: name.to_string(),
                index: i,
            });
        }
        if let Some(i) = self.params.iter().position(|p| p == name) {
            return Some(Variable {
                kind: VarKind::Parameter,
                name: name.to_string(),
                index: i,
            });
        }
        let base = name.strip_prefix('d')?;
        let i = self.coords.iter().position(|c| c == base)?;
        Some(Variable {
            kind: VarKind::Velocity,
            name: name.to_string(),
            index: i,
        })
    }

    pub fn coordinate(&self, i: usize) -> Variable {
        Variable {
            kind: VarKind::Coordinate,
            name: self.coords[i].clone(),
            index: i,
        }
    }

    pub fn velocity(&self, i: usize) -> Variable {
        Variable {
            kind: VarKind::Velocity,
            name: format!("d{}", self.coords[i]),
            index: i,
        }
    }

    pub fn parse(&self, text: &str) -> Result<Expression, ExprError> {
        parse(text, self)
    }

    /// Partial derivative with respect to a coordinate or velocity given by name.
    pub fn diff(&self, e: &Expression, name: &str) -> Result<Expression, ExprError> {
        match self.resolve(name) {
            Some(var) if var.kind != VarKind::Parameter => Ok(e.diff(&var)),
            _ => Err(ExprError::UnknownVariable(name.to_string())),
        }
    }
}

impl Expression {
    pub fn zero() -> Self {
        Self::Constant(0.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Constant(c) if *c == 0.0)
    }

    pub fn eval<E: Env + ?Sized>(&self, env: &E) -> Result<f64, ExprError> {
        match self {
            Self::Constant(c) => Ok(*c),
            Self::Variable(var) => env.value(var),
            Self::Unary(op, a) => {
                let x = a.eval(env)?;
                Ok(match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Tan => x.tan(),
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Log => {
                        if x < 0.0 {
                            return Err(ExprError::Domain {
                                function: "log",
                                argument: x,
                            });
                        }
                        x.ln()
                    }
                    UnaryOp::Sqrt => {
                        if x < 0.0 {
                            return Err(ExprError::Domain {
                                function: "sqrt",
                                argument: x,
                            });
                        }
                        x.sqrt()
                    }
                })
            }
            Self::Binary(op, a, b) => {
                let x = a.eval(env)?;
                let y = b.eval(env)?;
                Ok(match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => x / y,
                    BinaryOp::Pow => pow(x, y)?,
                })
            }
        }
    }

    /// Names of all variables appearing in the expression.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Self::Constant(_) => {}
            Self::Variable(v) => {
                out.insert(v.name.clone());
            }
            Self::Unary(_, a) => a.collect_variables(out),
            Self::Binary(_, a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
        }
    }

    pub fn depends_on(&self, kind: VarKind, index: usize) -> bool {
        match self {
            Self::Constant(_) => false,
            Self::Variable(v) => v.kind == kind && v.index == index,
            Self::Unary(_, a) => a.depends_on(kind, index),
            Self::Binary(_, a, b) => a.depends_on(kind, index) || b.depends_on(kind, index),
        }
    }

    // Constructors with literal folding of zeros, ones and constant operands.

    pub fn neg(a: Expression) -> Expression {
        match a {
            Self::Constant(c) => Self::Constant(-c),
            Self::Unary(UnaryOp::Neg, inner) => *inner,
            a => Self::Unary(UnaryOp::Neg, Box::new(a)),
        }
    }

    pub fn unary(op: UnaryOp, a: Expression) -> Expression {
        if op == UnaryOp::Neg {
            return Self::neg(a);
        }
        Self::Unary(op, Box::new(a))
    }

    pub fn add(a: Expression, b: Expression) -> Expression {
        match (a, b) {
            (Self::Constant(x), Self::Constant(y)) => Self::Constant(x + y),
            (a, b) if a.is_zero() => b,
            (a, b) if b.is_zero() => a,
            (a, b) => Self::Binary(BinaryOp::Add, Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expression, b: Expression) -> Expression {
        match (a, b) {
            (Self::Constant(x), Self::Constant(y)) => Self::Constant(x - y),
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => Self::neg(b),
            (a, b) => Self::Binary(BinaryOp::Sub, Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expression, b: Expression) -> Expression {
        match (a, b) {
            (Self::Constant(x), Self::Constant(y)) => Self::Constant(x * y),
            (a, _) if a.is_zero() => Self::zero(),
            (_, b) if b.is_zero() => Self::zero(),
            (Self::Constant(x), b) if x == 1.0 => b,
            (a, Self::Constant(y)) if y == 1.0 => a,
            (Self::Constant(x), b) if x == -1.0 => Self::neg(b),
            (a, Self::Constant(y)) if y == -1.0 => Self::neg(a),
            (a, b) => Self::Binary(BinaryOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expression, b: Expression) -> Expression {
        match (a, b) {
            (Self::Constant(x), Self::Constant(y)) if y != 0.0 => Self::Constant(x / y),
            (a, b) if a.is_zero() && !b.is_zero() => Self::zero(),
            (a, Self::Constant(y)) if y == 1.0 => a,
            (a, b) => Self::Binary(BinaryOp::Div, Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expression, b: Expression) -> Expression {
        match (a, b) {
            (_, Self::Constant(y)) if y == 0.0 => Self::Constant(1.0),
            (a, Self::Constant(y)) if y == 1.0 => a,
            (a, b) => Self::Binary(BinaryOp::Pow, Box::new(a), Box::new(b)),
        }
    }
}

fn pow(x: f64, y: f64) -> Result<f64, ExprError> {
    if x < 0.0 && y.fract() != 0.0 && y.is_finite() {
        return Err(ExprError::Domain {
            function: "pow",
            argument: x,
        });
    }
    if y.fract() == 0.0 && y.abs() <= i32::MAX as f64 {
        return Ok(x.powi(y as i32));
    }
    Ok(x.powf(y))
}

impl fmt::Display for Expression {
    /// Canonical form: every compound node is parenthesized, so re-parsing the
    /// printed text reproduces the tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) if c.is_sign_negative() && *c != 0.0 => write!(f, "(-{})", -c),
            Self::Constant(c) => write!(f, "{}", c.abs()),
            Self::Variable(v) => f.write_str(&v.name),
            Self::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            Self::Unary(op, a) => write!(f, "{}({a})", op.function_name()),
            Self::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}
