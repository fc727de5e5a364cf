//! Symbolic partial derivatives.

use super::simplify::{add, func, mul, pow, simplify};
use super::{Expr, Func, Node, Symbol};

pub(crate) fn differentiate(e: &Expr, var: &Symbol) -> Expr {
    d(&simplify(e), var)
}

// Input is simplified, output is simplified.
fn d(e: &Expr, var: &Symbol) -> Expr {
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(s) => Expr::int(i64::from(s == var)),
        Node::Add(xs) => add(xs.iter().map(|x| d(x, var)).collect()),
        Node::Mul(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let df = d(f, var);
                if df.is_const_zero() {
                    continue;
                }
                let mut parts: Vec<Expr> = fs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, g)| g.clone())
                    .collect();
                parts.push(df);
                terms.push(mul(parts));
            }
            add(terms)
        }
        Node::Div(a, b) => {
            // not produced by simplify, kept for completeness
            let num = add(vec![
                mul(vec![d(a, var), b.clone()]),
                mul(vec![Expr::int(-1), a.clone(), d(b, var)]),
            ]);
            mul(vec![num, pow(b.clone(), -2)])
        }
        Node::Pow(a, n) => {
            let da = d(a, var);
            if da.is_const_zero() {
                return Expr::zero();
            }
            mul(vec![Expr::int(*n), pow(a.clone(), n - 1), da])
        }
        Node::Neg(a) => mul(vec![Expr::int(-1), d(a, var)]),
        Node::Func(f, a) => {
            let da = d(a, var);
            if da.is_const_zero() {
                return Expr::zero();
            }
            let outer = match f {
                Func::Sin => func(Func::Cos, a.clone()),
                Func::Cos => mul(vec![Expr::int(-1), func(Func::Sin, a.clone())]),
                Func::Exp => e.clone(),
                Func::Sqrt => mul(vec![Expr::rational(1, 2), pow(e.clone(), -1)]),
            };
            mul(vec![outer, da])
        }
    }
}
