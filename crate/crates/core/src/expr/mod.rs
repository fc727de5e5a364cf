//! Scalar symbolic expressions over chart coordinates and time.
//!
//! An [`Expr`] is an immutable, reference-counted tree whose leaves are exact
//! rational constants and symbols. Every identity check in the crate funnels
//! through [`ZeroTest::is_zero`], which first simplifies structurally and then
//! falls back to randomized evaluation on a [`DomainBox`].

mod diff;
mod domain;
pub(crate) mod eval;
mod parse;
mod simplify;

use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use domain::{DomainBox, DomainBoxBuilder, Point, ZeroTest, DEFAULT_MARGIN, DEFAULT_TOL, DEFAULT_TRIALS};
pub use eval::{Env, Program, SliceEnv};
pub use parse::{parse, Parser};

/// The reserved time symbol. It never names a chart coordinate.
pub const TIME: &str = "t";

/// Errors raised by parsing, evaluation and zero testing.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("expression undefined at point: {0}")]
    UndefinedAtPoint(String),
    #[error("no binding for symbol `{0}`")]
    MissingBinding(String),
    #[error("domain exhausted after {0} consecutive rejected samples")]
    DomainExhausted(usize),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid zero-test settings: {0}")]
    InvalidSettings(String),
}

/// An interned identifier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_time(&self) -> bool {
        &*self.0 == TIME
    }
}

impl Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Unary functions understood by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

/// Expression tree nodes.
///
/// `Div` and `Neg` appear in parser output; [`Expr::simplify`] rewrites them
/// into products with negative powers and a `-1` coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Const(BigRational),
    Var(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Expr, Expr),
    Pow(Expr, i64),
    Neg(Expr),
    Func(Func, Expr),
}

/// Immutable symbolic expression. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(q: BigRational) -> Self {
        Expr::from_node(Node::Const(q))
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    /// `num/den` in lowest terms. Panics when `den == 0`.
    pub fn rational(num: i64, den: i64) -> Self {
        Expr::constant(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn var(name: impl Into<Symbol>) -> Self {
        Expr::from_node(Node::Var(name.into()))
    }

    pub fn time() -> Self {
        Expr::var(TIME)
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::from_node(Node::Add(terms)),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Self {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::from_node(Node::Mul(factors)),
        }
    }

    pub fn pow(&self, n: i64) -> Self {
        Expr::from_node(Node::Pow(self.clone(), n))
    }

    pub fn apply(f: Func, arg: Expr) -> Self {
        Expr::from_node(Node::Func(f, arg))
    }

    pub fn sin(&self) -> Self {
        Expr::apply(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Self {
        Expr::apply(Func::Cos, self.clone())
    }

    pub fn exp(&self) -> Self {
        Expr::apply(Func::Exp, self.clone())
    }

    pub fn sqrt(&self) -> Self {
        Expr::apply(Func::Sqrt, self.clone())
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Const(q) => Some(q),
            _ => None,
        }
    }

    /// True only for the literal constant zero; no simplification is applied.
    pub fn is_const_zero(&self) -> bool {
        self.as_const().is_some_and(|q| q.is_zero())
    }

    pub fn is_const_one(&self) -> bool {
        self.as_const().is_some_and(|q| q.is_one())
    }

    /// Free symbols, including `t` when present.
    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(s) => {
                out.insert(s.clone());
            }
            Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Node::Div(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Func(_, a) => a.collect_symbols(out),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Add(xs) | Node::Mul(xs) => 1 + xs.iter().map(Expr::size).sum::<usize>(),
            Node::Div(a, b) => 1 + a.size() + b.size(),
            Node::Pow(a, _) | Node::Neg(a) | Node::Func(_, a) => 1 + a.size(),
        }
    }

    /// Structural simplification; see the `simplify` module for the rule set.
    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    /// Partial derivative with respect to `var`, simplified.
    pub fn differentiate(&self, var: &Symbol) -> Expr {
        diff::differentiate(self, var)
    }

    /// Simultaneous substitution of symbols, followed by simplification.
    pub fn substitute<F>(&self, lookup: &F) -> Expr
    where
        F: Fn(&Symbol) -> Option<Expr>,
    {
        self.substitute_raw(lookup).simplify()
    }

    fn substitute_raw<F>(&self, lookup: &F) -> Expr
    where
        F: Fn(&Symbol) -> Option<Expr>,
    {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(s) => lookup(s).unwrap_or_else(|| self.clone()),
            Node::Add(xs) => Expr::from_node(Node::Add(xs.iter().map(|x| x.substitute_raw(lookup)).collect())),
            Node::Mul(xs) => Expr::from_node(Node::Mul(xs.iter().map(|x| x.substitute_raw(lookup)).collect())),
            Node::Div(a, b) => Expr::from_node(Node::Div(a.substitute_raw(lookup), b.substitute_raw(lookup))),
            Node::Pow(a, n) => Expr::from_node(Node::Pow(a.substitute_raw(lookup), *n)),
            Node::Neg(a) => Expr::from_node(Node::Neg(a.substitute_raw(lookup))),
            Node::Func(f, a) => Expr::from_node(Node::Func(*f, a.substitute_raw(lookup))),
        }
    }

    /// Evaluate at a point; see [`Env`].
    pub fn evaluate<E: Env + ?Sized>(&self, env: &E) -> Result<f64, ExprError> {
        eval::evaluate(self, env)
    }

    /// Evaluate and also report the largest absolute value of any subterm.
    pub fn evaluate_with_scale<E: Env + ?Sized>(&self, env: &E) -> Result<(f64, f64), ExprError> {
        eval::evaluate_with_scale(self, env)
    }

    /// Compile to a stack program reading symbol values by position.
    pub fn compile(&self, slots: &[Symbol]) -> Result<Program, ExprError> {
        Program::compile(self, slots)
    }
}

/// Substitute using a list of `(symbol, replacement)` pairs.
pub fn substitute(e: &Expr, bindings: &[(Symbol, Expr)]) -> Expr {
    e.substitute(&|s: &Symbol| bindings.iter().find(|(k, _)| k == s).map(|(_, v)| v.clone()))
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, q: &BigRational) -> fmt::Result {
    let body = if q.denom().is_one() {
        format!("{}", q.numer().abs())
    } else {
        format!("{}/{}", q.numer().abs(), q.denom())
    };
    match (q.is_negative(), q.denom().is_one()) {
        (false, true) => f.write_str(&body),
        (false, false) => write!(f, "({body})"),
        (true, _) => write!(f, "(-{body})"),
    }
}

/// Printing emits grammar-valid text that re-parses to an equal expression.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(q) => write_rational(f, q),
            Node::Var(s) => write!(f, "{s}"),
            Node::Add(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            Node::Mul(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            Node::Div(a, b) => write!(f, "({a}/{b})"),
            Node::Pow(a, n) if *n < 0 => write!(f, "(1/({a}^{}))", -n),
            Node::Pow(a, n) => write!(f, "({a}^{n})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $build:expr) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $build(self, rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $build(self.clone(), rhs.clone())
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $build(self, rhs.clone())
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $build(self.clone(), rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::from_node(Node::Add(vec![a, b])));
binop!(Sub, sub, |a, b: Expr| Expr::from_node(Node::Add(vec![
    a,
    Expr::from_node(Node::Neg(b))
])));
binop!(Mul, mul, |a, b| Expr::from_node(Node::Mul(vec![a, b])));
binop!(Div, div, |a, b| Expr::from_node(Node::Div(a, b)));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::from_node(Node::Neg(self))
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::from_node(Node::Neg(self.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trips_through_parser() {
        let chart = ["x", "v", "a"];
        let e = parse("3/2 * a^2 / v - x^3 + sqrt(v) * -2", &chart).unwrap();
        let printed = e.to_string();
        let again = parse(&printed, &chart).unwrap();
        let mut zt = ZeroTest::new(7);
        let dom = DomainBox::builder()
            .interval("x", -2.0, 2.0)
            .interval("v", 0.5, 2.0)
            .interval("a", -2.0, 2.0)
            .build()
            .unwrap();
        assert!(zt.is_zero(&(e - again), &dom).unwrap());
    }

    #[test]
    fn negative_constants_print_parenthesized() {
        let e = Expr::rational(-3, 2) * Expr::var("x");
        assert_eq!(e.to_string(), "((-3/2)*x)");
    }

    #[test]
    fn free_symbols_include_time() {
        let e = parse("sin(t) * x + 2", &["x"]).unwrap();
        let syms: Vec<_> = e.free_symbols().into_iter().map(|s| s.to_string()).collect();
        assert_eq!(syms, vec!["t", "x"]);
    }

    #[test]
    fn substitute_renames_simultaneously() {
        let e = parse("x - y", &["x", "y"]).unwrap();
        let swapped = substitute(
            &e,
            &[(Symbol::new("x"), Expr::var("y")), (Symbol::new("y"), Expr::var("x"))],
        );
        let expect = parse("y - x", &["x", "y"]).unwrap().simplify();
        assert_eq!(swapped, expect);
    }
}
