//! Lagrangian expressions `L(t, x, xd, xdd)`.
//!
//! An expression is parsed once into an immutable tree over the `1 + 3n`
//! variables `t, x1..xn, xd1..xdn, xdd1..xddn`. Values come from a plain
//! `f64` walk of the tree and first partial derivatives from one forward-mode
//! (dual number) walk per variable.

mod dual;
mod eval;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::Partials;

/// A variable reference. Component indices are zero-based internally and
/// printed one-based (`x1` is `Var::X(0)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    X(usize),
    Xd(usize),
    Xdd(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

/// Expression tree node. `Pow` carries its exponent as a literal.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, f64),
    Call(Func, Vec<Node>),
}

impl Node {
    fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Node::Const(_) => {}
            Node::Var(v) => f(*v),
            Node::Neg(a) | Node::Pow(a, _) => a.visit_vars(f),
            Node::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Node::Call(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T => write!(f, "t"),
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Xd(i) => write!(f, "xd{}", i + 1),
            Var::Xdd(i) => write!(f, "xdd{}", i + 1),
        }
    }
}

// Canonical form: every compound node is parenthesized, numbers use the
// shortest round-trip representation.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({a} {sym} {b})")
            }
            Node::Pow(a, c) => write!(f, "pow({a}, {c:?})"),
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("index out of range: `{name}` at byte {offset} (dimension is {dim})")]
    IndexOutOfRange {
        offset: usize,
        name: String,
        dim: usize,
    },
    #[error("domain error in `{node}`: {message}")]
    Domain { node: String, message: &'static str },
    #[error("evaluation point has dimension {got}, expression has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("dimension must be positive")]
    ZeroDimension,
}

/// A parsed Lagrangian of dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianExpr {
    root: Node,
    dim: usize,
    autonomous: bool,
    uses: VarUse,
}

/// Which variable groups the tree references; used to skip derivative passes
/// that are identically zero.
#[derive(Debug, Clone, PartialEq)]
struct VarUse {
    t: bool,
    x: Vec<bool>,
    xd: Vec<bool>,
    xdd: Vec<bool>,
}

impl LagrangianExpr {
    pub fn parse(text: &str, n: usize) -> Result<Self, ExprError> {
        if n == 0 {
            return Err(ExprError::ZeroDimension);
        }
        let root = parser::parse(text, n)?;
        Ok(Self::from_root(root, n))
    }

    fn from_root(root: Node, dim: usize) -> Self {
        let mut uses = VarUse {
            t: false,
            x: vec![false; dim],
            xd: vec![false; dim],
            xdd: vec![false; dim],
        };
        root.visit_vars(&mut |v| match v {
            Var::T => uses.t = true,
            Var::X(i) => uses.x[i] = true,
            Var::Xd(i) => uses.xd[i] = true,
            Var::Xdd(i) => uses.xdd[i] = true,
        });
        LagrangianExpr {
            autonomous: !uses.t,
            root,
            dim,
            uses,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True iff no node references `t`.
    pub fn is_autonomous(&self) -> bool {
        self.autonomous
    }

    /// Canonical serialization; re-parses to an identical tree.
    pub fn canonical(&self) -> String {
        self.root.to_string()
    }

    pub fn eval(&self, p: &EvalPoint) -> Result<f64, ExprError> {
        self.check_dim(p)?;
        eval::value(&self.root, p)
    }

    /// All `1 + 3n` first partials, one directional pass per referenced
    /// variable. `abs` uses `sign(0) = 0`.
    pub fn partials(&self, p: &EvalPoint) -> Result<Partials, ExprError> {
        self.check_dim(p)?;
        eval::partials(&self.root, p, &self.uses)
    }

    fn check_dim(&self, p: &EvalPoint) -> Result<(), ExprError> {
        for len in [p.x.len(), p.xd.len(), p.xdd.len()] {
            if len != self.dim {
                return Err(ExprError::Dimension {
                    expected: self.dim,
                    got: len,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for LagrangianExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// The argument tuple `(t, x, xd, xdd)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub xd: Vec<f64>,
    pub xdd: Vec<f64>,
}

impl EvalPoint {
    pub fn new(t: f64, x: Vec<f64>, xd: Vec<f64>, xdd: Vec<f64>) -> Self {
        EvalPoint { t, x, xd, xdd }
    }

    pub fn scalar(t: f64, x: f64, xd: f64, xdd: f64) -> Self {
        EvalPoint::new(t, vec![x], vec![xd], vec![xdd])
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self
                .x
                .iter()
                .chain(&self.xd)
                .chain(&self.xdd)
                .all(|v| v.is_finite())
    }
}
