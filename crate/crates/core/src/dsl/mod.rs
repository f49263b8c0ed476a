//! Textual symbol definitions.
//!
//! A symbol is an expression in the real variable `x`, the imaginary unit `i`
//! and any number of named real parameters, e.g. `(2+sin(x))*exp(i*a*x)`.
//! Supported operations are `+ - * / ^`, unary minus and the functions
//! `sin`, `cos`, `exp`, `abs`, `conj`.

mod eval;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use eval::evaluate;
pub use parse::parse;

/// Parameter name to value.
pub type Bindings = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Conj,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Sin, Func::Cos, Func::Exp, Func::Abs, Func::Conj];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Conj => "conj",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    ImagUnit,
    Var,
    Param(String),
    Neg(Box<Node>),
    Binary {
        op: BinOp,
        lhs: Box<Node>,
        rhs: Box<Node>,
    },
    Call {
        func: Func,
        arg: Box<Node>,
    },
}

impl Node {
    pub fn binary(op: BinOp, lhs: Node, rhs: Node) -> Node {
        Node::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn call(func: Func, arg: Node) -> Node {
        Node::Call {
            func,
            arg: Box::new(arg),
        }
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Node::Param(name) => {
                out.insert(name.clone());
            }
            Node::Neg(a) | Node::Call { arg: a, .. } => a.collect_params(out),
            Node::Binary { lhs, rhs, .. } => {
                lhs.collect_params(out);
                rhs.collect_params(out);
            }
            Node::Const(_) | Node::ImagUnit | Node::Var => {}
        }
    }
}

/// Fully parenthesized rendering; parsing it back yields the same tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{})", -c)
            }
            Node::Const(c) => write!(f, "{c}"),
            Node::ImagUnit => f.write_str("i"),
            Node::Var => f.write_str("x"),
            Node::Param(name) => f.write_str(name),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Binary { op, lhs, rhs } => write!(f, "({lhs}{}{rhs})", op.symbol()),
            Node::Call { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// Parsed symbol definition together with the parameters it references.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolExpr {
    root: Node,
    params: BTreeSet<String>,
}

impl SymbolExpr {
    pub fn new(root: Node) -> Self {
        let mut params = BTreeSet::new();
        root.collect_params(&mut params);
        SymbolExpr { root, params }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn params(&self) -> &BTreeSet<String> {
        &self.params
    }

    /// Canonical text, stable across equivalent spellings of the same tree.
    pub fn canonical(&self) -> String {
        self.root.to_string()
    }

    /// `f(-x)`.
    pub fn reflected(&self) -> SymbolExpr {
        SymbolExpr::new(substitute_var(&self.root, &Node::Neg(Box::new(Node::Var))))
    }

    /// `conj(f(-x))`, built on the tree.
    pub fn conj_reflected(&self) -> SymbolExpr {
        SymbolExpr::new(Node::call(Func::Conj, self.reflected().root))
    }

    /// `f(x) / f(-x)`.
    pub fn test_symbol_expr(&self) -> SymbolExpr {
        SymbolExpr::new(Node::binary(BinOp::Div, self.root.clone(), self.reflected().root))
    }
}

fn substitute_var(node: &Node, with: &Node) -> Node {
    match node {
        Node::Var => with.clone(),
        Node::Neg(a) => Node::Neg(Box::new(substitute_var(a, with))),
        Node::Call { func, arg } => Node::call(*func, substitute_var(arg, with)),
        Node::Binary { op, lhs, rhs } => {
            Node::binary(*op, substitute_var(lhs, with), substitute_var(rhs, with))
        }
        other => other.clone(),
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl FromStr for SymbolExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}
