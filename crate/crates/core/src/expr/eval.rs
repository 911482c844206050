use serde::{Deserialize, Serialize};

use super::dual::{Dual, Scalar};
use super::{BinOp, EvalPoint, ExprError, Func, Node, Var, VarUse};

/// First partial derivatives of `L` at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partials {
    pub value: f64,
    pub t: f64,
    pub x: Vec<f64>,
    pub xd: Vec<f64>,
    pub xdd: Vec<f64>,
}

fn lookup(p: &EvalPoint, v: Var) -> f64 {
    match v {
        Var::T => p.t,
        Var::X(i) => p.x[i],
        Var::Xd(i) => p.xd[i],
        Var::Xdd(i) => p.xdd[i],
    }
}

fn domain(node: &Node, message: &'static str) -> ExprError {
    ExprError::Domain {
        node: node.to_string(),
        message,
    }
}

fn walk<S: Scalar>(node: &Node, var: &impl Fn(Var) -> S) -> Result<S, ExprError> {
    Ok(match node {
        Node::Const(c) => S::constant(*c),
        Node::Var(v) => var(*v),
        Node::Neg(a) => -walk(a, var)?,
        Node::Binary(op, a, b) => {
            let a = walk(a, var)?;
            let b = walk(b, var)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.value() == 0.0 {
                        return Err(domain(node, "division by zero"));
                    }
                    a / b
                }
            }
        }
        Node::Pow(a, c) => {
            let u = walk(a, var)?;
            if u.value() < 0.0 && c.fract() != 0.0 {
                return Err(domain(node, "non-integer power of a negative base"));
            }
            if u.value() == 0.0 && *c < 0.0 {
                return Err(domain(node, "negative power of zero"));
            }
            u.pow_lit(*c)
        }
        Node::Call(func, args) => {
            let u = walk(&args[0], var)?;
            match func {
                Func::Abs => u.abs(),
                Func::Sqrt => {
                    if u.value() < 0.0 {
                        return Err(domain(node, "square root of a negative number"));
                    }
                    u.sqrt()
                }
                Func::Exp => u.exp(),
                Func::Log => {
                    if u.value() <= 0.0 {
                        return Err(domain(node, "logarithm of a non-positive number"));
                    }
                    u.ln()
                }
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Min | Func::Max => {
                    let w = walk(&args[1], var)?;
                    let take_first = match func {
                        Func::Min => u.value() <= w.value(),
                        _ => u.value() >= w.value(),
                    };
                    if take_first {
                        u
                    } else {
                        w
                    }
                }
            }
        }
    })
}

pub(super) fn value(root: &Node, p: &EvalPoint) -> Result<f64, ExprError> {
    walk::<f64>(root, &|v| lookup(p, v))
}

fn directional(root: &Node, p: &EvalPoint, seed: Var) -> Result<f64, ExprError> {
    let d = walk::<Dual>(root, &|v| {
        let x = lookup(p, v);
        if v == seed {
            Dual::seeded(x)
        } else {
            Dual::constant(x)
        }
    })?;
    Ok(d.d)
}

pub(super) fn partials(root: &Node, p: &EvalPoint, uses: &VarUse) -> Result<Partials, ExprError> {
    let n = p.x.len();
    let value = value(root, p)?;
    let pass = |used: bool, v: Var| -> Result<f64, ExprError> {
        if used {
            directional(root, p, v)
        } else {
            Ok(0.0)
        }
    };
    let t = pass(uses.t, Var::T)?;
    let mut out = Partials {
        value,
        t,
        x: vec![0.0; n],
        xd: vec![0.0; n],
        xdd: vec![0.0; n],
    };
    for i in 0..n {
        out.x[i] = pass(uses.x[i], Var::X(i))?;
        out.xd[i] = pass(uses.xd[i], Var::Xd(i))?;
        out.xdd[i] = pass(uses.xdd[i], Var::Xdd(i))?;
    }
    Ok(out)
}
