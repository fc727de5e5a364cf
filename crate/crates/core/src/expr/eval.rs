//! Floating-point evaluation, directly on the tree or through a compiled
//! stack program.

use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;

use super::{Expr, ExprError, Func, Node, Symbol};

/// Source of symbol values.
pub trait Env {
    fn lookup(&self, sym: &Symbol) -> Option<f64>;
}

impl Env for BTreeMap<Symbol, f64> {
    fn lookup(&self, sym: &Symbol) -> Option<f64> {
        self.get(sym).copied()
    }
}

impl Env for BTreeMap<String, f64> {
    fn lookup(&self, sym: &Symbol) -> Option<f64> {
        self.get(sym.as_str()).copied()
    }
}

impl Env for HashMap<String, f64> {
    fn lookup(&self, sym: &Symbol) -> Option<f64> {
        self.get(sym.as_str()).copied()
    }
}

impl Env for HashMap<Symbol, f64> {
    fn lookup(&self, sym: &Symbol) -> Option<f64> {
        self.get(sym).copied()
    }
}

/// Parallel slices of symbols and values.
#[derive(Debug, Clone, Copy)]
pub struct SliceEnv<'a> {
    pub symbols: &'a [Symbol],
    pub values: &'a [f64],
}

impl Env for SliceEnv<'_> {
    fn lookup(&self, sym: &Symbol) -> Option<f64> {
        self.symbols
            .iter()
            .position(|s| s == sym)
            .and_then(|i| self.values.get(i).copied())
    }
}

fn undefined(what: &str) -> ExprError {
    ExprError::UndefinedAtPoint(what.to_string())
}

pub(crate) const NON_FINITE: &str = "non-finite intermediate value";

fn checked(v: f64) -> Result<f64, ExprError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(undefined(NON_FINITE))
    }
}

fn powi(b: f64, n: i64) -> Result<f64, ExprError> {
    if b == 0.0 && n < 0 {
        return Err(undefined("division by zero"));
    }
    let n = i32::try_from(n).map_err(|_| undefined("exponent out of range"))?;
    checked(b.powi(n))
}

fn apply(f: Func, x: f64) -> Result<f64, ExprError> {
    match f {
        Func::Sin => Ok(x.sin()),
        Func::Cos => Ok(x.cos()),
        Func::Exp => checked(x.exp()),
        Func::Sqrt if x < 0.0 => Err(undefined("sqrt of a negative value")),
        Func::Sqrt => Ok(x.sqrt()),
    }
}

fn eval_rec<E: Env + ?Sized>(e: &Expr, env: &E, scale: &mut f64) -> Result<f64, ExprError> {
    let v = match e.node() {
        Node::Const(q) => q.to_f64().ok_or_else(|| undefined("constant out of range"))?,
        Node::Var(s) => env.lookup(s).ok_or_else(|| ExprError::MissingBinding(s.to_string()))?,
        Node::Add(xs) => {
            let mut acc = 0.0;
            for x in xs {
                acc += eval_rec(x, env, scale)?;
            }
            acc
        }
        Node::Mul(xs) => {
            let mut acc = 1.0;
            for x in xs {
                acc *= eval_rec(x, env, scale)?;
            }
            acc
        }
        Node::Div(a, b) => {
            let num = eval_rec(a, env, scale)?;
            let den = eval_rec(b, env, scale)?;
            if den == 0.0 {
                return Err(undefined("division by zero"));
            }
            num / den
        }
        Node::Pow(a, n) => powi(eval_rec(a, env, scale)?, *n)?,
        Node::Neg(a) => -eval_rec(a, env, scale)?,
        Node::Func(f, a) => apply(*f, eval_rec(a, env, scale)?)?,
    };
    let v = checked(v)?;
    *scale = scale.max(v.abs());
    Ok(v)
}

pub(crate) fn evaluate<E: Env + ?Sized>(e: &Expr, env: &E) -> Result<f64, ExprError> {
    let mut scale = 0.0;
    eval_rec(e, env, &mut scale)
}

pub(crate) fn evaluate_with_scale<E: Env + ?Sized>(e: &Expr, env: &E) -> Result<(f64, f64), ExprError> {
    let mut scale = 0.0;
    let v = eval_rec(e, env, &mut scale)?;
    Ok((v, scale))
}

#[derive(Debug, Clone, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize),
    Mul(usize),
    Div,
    Pow(i64),
    Neg,
    Func(Func),
}

/// An expression compiled against a fixed slot order, for repeated
/// evaluation inside integrators and samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    depth: usize,
}

impl Program {
    pub fn compile(e: &Expr, slots: &[Symbol]) -> Result<Program, ExprError> {
        let mut ops = Vec::new();
        emit(e, slots, &mut ops)?;
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) => depth += 1,
                Op::Add(n) | Op::Mul(n) => depth = depth + 1 - n,
                Op::Div => depth -= 1,
                Op::Pow(_) | Op::Neg | Op::Func(_) => {}
            }
            max_depth = max_depth.max(depth);
        }
        Ok(Program { ops, depth: max_depth })
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        let mut stack = Vec::with_capacity(self.depth);
        for op in &self.ops {
            match op {
                Op::Const(c) => stack.push(*c),
                Op::Var(i) => stack.push(values[*i]),
                Op::Add(n) => {
                    let at = stack.len() - n;
                    let s = stack.drain(at..).sum();
                    stack.push(s);
                }
                Op::Mul(n) => {
                    let at = stack.len() - n;
                    let p = stack.drain(at..).product();
                    stack.push(p);
                }
                Op::Div => {
                    let den = stack.pop().unwrap();
                    let num = stack.pop().unwrap();
                    if den == 0.0 {
                        return Err(undefined("division by zero"));
                    }
                    stack.push(num / den);
                }
                Op::Pow(n) => {
                    let b = stack.pop().unwrap();
                    stack.push(powi(b, *n)?);
                }
                Op::Neg => {
                    let v = stack.pop().unwrap();
                    stack.push(-v);
                }
                Op::Func(f) => {
                    let v = stack.pop().unwrap();
                    stack.push(apply(*f, v)?);
                }
            }
        }
        checked(stack.pop().unwrap())
    }
}

fn emit(e: &Expr, slots: &[Symbol], ops: &mut Vec<Op>) -> Result<(), ExprError> {
    match e.node() {
        Node::Const(q) => ops.push(Op::Const(q.to_f64().ok_or_else(|| undefined("constant out of range"))?)),
        Node::Var(s) => {
            let i = slots
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| ExprError::MissingBinding(s.to_string()))?;
            ops.push(Op::Var(i));
        }
        Node::Add(xs) | Node::Mul(xs) => {
            for x in xs {
                emit(x, slots, ops)?;
            }
            ops.push(match e.node() {
                Node::Add(_) => Op::Add(xs.len()),
                _ => Op::Mul(xs.len()),
            });
        }
        Node::Div(a, b) => {
            emit(a, slots, ops)?;
            emit(b, slots, ops)?;
            ops.push(Op::Div);
        }
        Node::Pow(a, n) => {
            emit(a, slots, ops)?;
            ops.push(Op::Pow(*n));
        }
        Node::Neg(a) => {
            emit(a, slots, ops)?;
            ops.push(Op::Neg);
        }
        Node::Func(f, a) => {
            emit(a, slots, ops)?;
            ops.push(Op::Func(*f));
        }
    }
    Ok(())
}
