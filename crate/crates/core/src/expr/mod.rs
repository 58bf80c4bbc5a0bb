//! Complex-valued expressions `f(z)` and the built-in problem registry.
//!
//! ```
//! use gensecant::{parse, Complex64};
//!
//! let f = parse("z^3 - 8").unwrap();
//! assert_eq!(f.eval(Complex64::new(2.0, 0.0)), Complex64::new(0.0, 0.0));
//! ```

mod parser;
mod problem;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

pub use parser::{ParseError, ParseErrorKind};
pub use problem::{builtin_problems, lookup, Problem};

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
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, w: Complex64) -> Complex64 {
        match self {
            Func::Sin => w.sin(),
            Func::Cos => w.cos(),
            Func::Tan => w.tan(),
            Func::Sinh => w.sinh(),
            Func::Cosh => w.cosh(),
            Func::Tanh => w.tanh(),
            Func::Exp => w.exp(),
            Func::Log => w.ln(),
            Func::Sqrt => w.sqrt(),
        }
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(Complex64),
    /// The variable `z`.
    Var,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn constant(re: f64, im: f64) -> Node {
        Node::Const(Complex64::new(re, im))
    }

    pub fn binary(op: BinOp, lhs: Node, rhs: Node) -> Node {
        Node::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(func: Func, arg: Node) -> Node {
        Node::Call(func, Box::new(arg))
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Node::Const(c) => *c,
            Node::Var => z,
            Node::Neg(a) => -a.eval(z),
            Node::Binary(op, a, b) => {
                let (a, b) = (a.eval(z), b.eval(z));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            Node::Call(f, a) => f.apply(a.eval(z)),
        }
    }
}

/// Integer exponents use repeated squaring; anything else takes the
/// principal branch `exp(b * log(a))`.
fn pow(a: Complex64, b: Complex64) -> Complex64 {
    if b.im == 0.0 && b.re.fract() == 0.0 && b.re.abs() <= i32::MAX as f64 {
        a.powi(b.re as i32)
    } else {
        a.powc(b)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) if c.im == 0.0 && c.re.is_sign_negative() => write!(f, "({})", c.re),
            Node::Const(c) if c.im == 0.0 => write!(f, "{}", c.re),
            Node::Const(c) => write!(f, "({}{:+}*i)", c.re, c.im),
            Node::Var => f.write_str("z"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a}{sym}{b})")
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Evaluation produced a NaN or infinite component.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("f({z}) is not finite: {value}")]
pub struct NonFinite {
    pub z: Complex64,
    pub value: Complex64,
}

/// A parsed expression in the single variable `z`. Immutable after parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
}

impl Expression {
    pub fn new(root: Node) -> Self {
        Expression { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Raw evaluation; NaN and infinities propagate through the tree.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.root.eval(z)
    }

    /// Evaluation with non-finite results tagged as an error value.
    pub fn eval_checked(&self, z: Complex64) -> Result<Complex64, NonFinite> {
        let value = self.eval(z);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(NonFinite { z, value })
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

pub fn parse(src: &str) -> Result<Expression, ParseError> {
    parser::parse_node(src).map(Expression::new)
}
