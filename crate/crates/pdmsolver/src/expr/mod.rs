//! Closed-form expression trees over one variable `x` and named parameters.
//!
//! This is the input language for mass profiles m(x), generating functions
//! f(x) and potentials V(x). Expressions are immutable after construction;
//! `eval`, `differentiate` and `simplify` are pure functions, so the same
//! tree can be evaluated from many threads.
//!
//! Parameters are late-bound: one parsed profile serves a whole parameter
//! sweep, with numeric values supplied per evaluation through [`Params`].

mod calculus;
mod parse;

pub use parse::{parse, ParseError};

use std::collections::BTreeMap;
use std::fmt;

/// Parameter bindings by name. A `BTreeMap` keeps iteration (and hence any
/// serialized form) deterministic.
pub type Params = BTreeMap<String, f64>;

/// Unary functions of the expression grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Neg,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sech,
}

impl UnaryFn {
    /// Grammar-level name; `Neg` has no function syntax and prints as `-`.
    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Neg => "-",
            UnaryFn::Exp => "exp",
            UnaryFn::Ln => "ln",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Abs => "abs",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Tan => "tan",
            UnaryFn::Sinh => "sinh",
            UnaryFn::Cosh => "cosh",
            UnaryFn::Tanh => "tanh",
            UnaryFn::Sech => "sech",
        }
    }
}

/// Binary operations of the expression grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression tree node. `sech` is a first-class function (rather than
/// `1/cosh`) because hyperbolic-secant mass profiles are the bread and
/// butter of this solver and first-class status keeps derivatives compact.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Numeric constant (always finite).
    Num(f64),
    /// The reserved independent variable `x`.
    Var,
    /// A named, late-bound parameter.
    Param(String),
    Unary(UnaryFn, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// Evaluation failure; carries a printed form of the offending node so the
/// message can point at the exact subexpression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    #[error("domain error: {what} in `{node}` (argument {arg})")]
    Domain {
        what: &'static str,
        arg: f64,
        node: String,
    },
    #[error("non-finite result in `{node}`")]
    NonFinite { node: String },
}

pub fn num(v: f64) -> Expr {
    Expr::Num(v)
}

pub fn var() -> Expr {
    Expr::Var
}

pub fn param(name: &str) -> Expr {
    Expr::Param(name.to_string())
}

// the by-value builder methods intentionally mirror the operator names;
// chaining `a.mul(b).add(c)` is the construction idiom throughout
#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn unary(f: UnaryFn, e: Expr) -> Expr {
        Expr::Unary(f, Box::new(e))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn add(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Add, self, o)
    }

    pub fn sub(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Sub, self, o)
    }

    pub fn mul(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Mul, self, o)
    }

    pub fn div(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Div, self, o)
    }

    pub fn pow(self, o: Expr) -> Expr {
        Expr::binary(BinOp::Pow, self, o)
    }

    pub fn neg(self) -> Expr {
        Expr::unary(UnaryFn::Neg, self)
    }

    pub fn exp(self) -> Expr {
        Expr::unary(UnaryFn::Exp, self)
    }

    pub fn ln(self) -> Expr {
        Expr::unary(UnaryFn::Ln, self)
    }

    pub fn sqrt(self) -> Expr {
        Expr::unary(UnaryFn::Sqrt, self)
    }

    /// Evaluate at `x` with all parameters bound.
    ///
    /// Returns a finite IEEE double or an error; NaN and infinities never
    /// escape silently.
    pub fn eval(&self, x: f64, params: &Params) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var => Ok(x),
            Expr::Param(name) => params
                .get(name)
                .copied()
                .ok_or_else(|| EvalError::UnboundParam(name.clone())),
            Expr::Unary(f, e) => {
                let v = e.eval(x, params)?;
                apply_unary(*f, v).map_err(|what| domain_or_nonfinite(what, v, self))
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval(x, params)?;
                let b = r.eval(x, params)?;
                apply_binary(*op, a, b).map_err(|what| domain_or_nonfinite(what, b, self))
            }
        }
    }

    /// Exact symbolic derivative of the given order, simplified after each
    /// differentiation round. `order` must be at least 1.
    pub fn differentiate(&self, order: u32) -> Expr {
        assert!(order >= 1, "derivative order must be >= 1");
        let mut d = self.simplify();
        for _ in 0..order {
            d = calculus::diff_once(&d).simplify();
        }
        d
    }

    /// Light, semantics-preserving cleanup: constant folding, `+0`/`*1`/`*0`
    /// identities, collapse of double negation. No trig or factoring rules;
    /// residual-based verification downstream makes aggressive
    /// simplification unnecessary.
    pub fn simplify(&self) -> Expr {
        calculus::simplify(self)
    }

    /// Names of all parameters appearing in the tree.
    pub fn parameter_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) | Expr::Var => {}
            Expr::Param(p) => out.push(p.clone()),
            Expr::Unary(_, e) => e.collect_params(out),
            Expr::Binary(_, l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
        }
    }
}

const NONFINITE: &str = "__nonfinite";

fn domain_or_nonfinite(what: &'static str, arg: f64, node: &Expr) -> EvalError {
    if what == NONFINITE {
        EvalError::NonFinite {
            node: node.to_string(),
        }
    } else {
        EvalError::Domain {
            what,
            arg,
            node: node.to_string(),
        }
    }
}

/// Scalar kernel shared by `eval` and constant folding, so that folded
/// constants are bit-identical to direct evaluation.
pub(crate) fn apply_unary(f: UnaryFn, v: f64) -> Result<f64, &'static str> {
    let out = match f {
        UnaryFn::Neg => -v,
        UnaryFn::Exp => v.exp(),
        UnaryFn::Ln => {
            if v <= 0.0 {
                return Err("ln of non-positive argument");
            }
            v.ln()
        }
        UnaryFn::Sqrt => {
            if v < 0.0 {
                return Err("sqrt of negative argument");
            }
            v.sqrt()
        }
        UnaryFn::Abs => v.abs(),
        UnaryFn::Sin => v.sin(),
        UnaryFn::Cos => v.cos(),
        UnaryFn::Tan => v.tan(),
        UnaryFn::Sinh => v.sinh(),
        UnaryFn::Cosh => v.cosh(),
        UnaryFn::Tanh => v.tanh(),
        UnaryFn::Sech => 1.0 / v.cosh(),
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(NONFINITE)
    }
}

pub(crate) fn apply_binary(op: BinOp, a: f64, b: f64) -> Result<f64, &'static str> {
    let out = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b == 0.0 {
                return Err("division by zero");
            }
            a / b
        }
        BinOp::Pow => {
            if a < 0.0 && b.fract() != 0.0 {
                return Err("negative base with non-integer exponent");
            }
            if a == 0.0 && b < 0.0 {
                return Err("zero base with negative exponent");
            }
            a.powf(b)
        }
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(NONFINITE)
    }
}

// Printer precedence levels; parenthesization must survive a round trip
// through the parser. A negative literal prints with a leading minus, so
// it sits at unary-minus level, not atom level.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Unary(UnaryFn::Neg, _) => 3,
        Expr::Num(v) if *v < 0.0 => 3,
        Expr::Binary(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn fmt_child(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 {
                    // keep the printed form inside the grammar: unary minus
                    write!(f, "-{}", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var => write!(f, "x"),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Unary(UnaryFn::Neg, e) => {
                write!(f, "-")?;
                fmt_child(e, 4, f)
            }
            Expr::Unary(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, l, r) => match op {
                BinOp::Add => {
                    fmt_child(l, 1, f)?;
                    write!(f, " + ")?;
                    fmt_child(r, 2, f)
                }
                BinOp::Sub => {
                    fmt_child(l, 1, f)?;
                    write!(f, " - ")?;
                    fmt_child(r, 2, f)
                }
                BinOp::Mul => {
                    fmt_child(l, 2, f)?;
                    write!(f, "*")?;
                    fmt_child(r, 3, f)
                }
                BinOp::Div => {
                    fmt_child(l, 2, f)?;
                    write!(f, "/")?;
                    fmt_child(r, 3, f)
                }
                BinOp::Pow => {
                    fmt_child(l, 5, f)?;
                    write!(f, "^")?;
                    // the grammar allows a sign after ^, anything lower
                    // precedence needs parentheses
                    fmt_child(r, 3, f)
                }
            },
        }
    }
}

// Serialize/deserialize as the printed expression string; this keeps JSON
// configs and report sidecars human-readable and stable.
impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Expr, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}
