//! Best-effort structural simplification.
//!
//! Output shape: `Neg` and `Div` are gone; sums and products are flat and
//! sorted; a product carries at most one constant, in front; powers have
//! exponents other than 0 and 1. Constant multiples of sums are distributed
//! only when they occur inside another sum.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Expr, Func, Node};

/// Largest exponent folded exactly for rational constants.
const MAX_CONST_POW: i64 = 256;

pub(crate) fn simplify(e: &Expr) -> Expr {
    match e.node() {
        Node::Const(_) | Node::Var(_) => e.clone(),
        Node::Neg(a) => mul(vec![Expr::int(-1), simplify(a)]),
        Node::Div(a, b) => mul(vec![simplify(a), pow(simplify(b), -1)]),
        Node::Add(xs) => add(xs.iter().map(simplify).collect()),
        Node::Mul(xs) => mul(xs.iter().map(simplify).collect()),
        Node::Pow(a, n) => pow(simplify(a), *n),
        Node::Func(f, a) => func(*f, simplify(a)),
    }
}

/// Splits a simplified term into its rational coefficient and the rest.
fn split_coeff(e: &Expr) -> (BigRational, Expr) {
    match e.node() {
        Node::Const(q) => (q.clone(), Expr::one()),
        Node::Mul(fs) => match fs[0].node() {
            Node::Const(q) => (q.clone(), Expr::product(fs[1..].to_vec())),
            _ => (BigRational::one(), e.clone()),
        },
        _ => (BigRational::one(), e.clone()),
    }
}

fn accumulate(terms: &mut BTreeMap<Expr, BigRational>, scale: &BigRational, term: &Expr) {
    match term.node() {
        Node::Add(xs) => {
            for x in xs {
                accumulate(terms, scale, x);
            }
        }
        _ => {
            let (q, rest) = split_coeff(term);
            if let Node::Add(_) = rest.node() {
                accumulate(terms, &(scale * &q), &rest);
                return;
            }
            let slot = terms.entry(rest).or_insert_with(BigRational::zero);
            *slot += scale * q;
        }
    }
}

fn scaled(q: BigRational, rest: Expr) -> Expr {
    if q.is_one() {
        return rest;
    }
    if rest.is_const_one() {
        return Expr::constant(q);
    }
    let mut fs = vec![Expr::constant(q)];
    match rest.node() {
        Node::Mul(xs) => fs.extend(xs.iter().cloned()),
        _ => fs.push(rest),
    }
    Expr::from_node(Node::Mul(fs))
}

/// Sum of already simplified terms.
pub(crate) fn add(terms: Vec<Expr>) -> Expr {
    let mut map = BTreeMap::new();
    let one = BigRational::one();
    for t in &terms {
        accumulate(&mut map, &one, t);
    }
    let mut constant = BigRational::zero();
    let mut out = Vec::with_capacity(map.len());
    for (rest, q) in map {
        if q.is_zero() {
            continue;
        }
        if rest.is_const_one() {
            constant += q;
        } else {
            out.push(scaled(q, rest));
        }
    }
    if !constant.is_zero() {
        out.push(Expr::constant(constant));
    }
    Expr::sum(out)
}

/// Product of already simplified factors.
pub(crate) fn mul(factors: Vec<Expr>) -> Expr {
    let mut coeff = BigRational::one();
    let mut powers: BTreeMap<Expr, i64> = BTreeMap::new();
    let mut stack = factors;
    while let Some(f) = stack.pop() {
        match f.node() {
            Node::Const(q) => coeff *= q,
            Node::Mul(xs) => stack.extend(xs.iter().cloned()),
            Node::Pow(b, n) => *powers.entry(b.clone()).or_insert(0) += n,
            _ => *powers.entry(f.clone()).or_insert(0) += 1,
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
    }
    let mut out = Vec::with_capacity(powers.len() + 1);
    let mut reshaped = false;
    for (base, n) in powers {
        if n == 0 {
            continue;
        }
        let p = pow(base.clone(), n);
        let unchanged = match p.node() {
            Node::Pow(b, m) => *b == base && *m == n,
            _ => p == base,
        };
        reshaped |= !unchanged;
        out.push(p);
    }
    if reshaped {
        out.push(Expr::constant(coeff));
        return mul(out);
    }
    if !coeff.is_one() {
        out.insert(0, Expr::constant(coeff));
    }
    Expr::product(out)
}

fn const_pow(q: &BigRational, n: i64) -> Option<BigRational> {
    if n.abs() > MAX_CONST_POW || (q.is_zero() && n < 0) {
        return None;
    }
    let base = if n < 0 { q.recip() } else { q.clone() };
    let mut acc = BigRational::one();
    for _ in 0..n.unsigned_abs() {
        acc *= &base;
    }
    Some(acc)
}

/// Integer power of an already simplified base.
pub(crate) fn pow(base: Expr, n: i64) -> Expr {
    if n == 0 {
        return Expr::one();
    }
    if n == 1 {
        return base;
    }
    match base.node() {
        Node::Const(q) => match const_pow(q, n) {
            Some(r) => Expr::constant(r),
            None => Expr::from_node(Node::Pow(base.clone(), n)),
        },
        Node::Pow(b, m) => match m.checked_mul(n) {
            Some(k) => pow(b.clone(), k),
            None => Expr::from_node(Node::Pow(base.clone(), n)),
        },
        Node::Mul(fs) => mul(fs.iter().map(|f| pow(f.clone(), n)).collect()),
        Node::Func(Func::Sqrt, u) if n % 2 == 0 => pow(u.clone(), n / 2),
        _ => Expr::from_node(Node::Pow(base.clone(), n)),
    }
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Function application to an already simplified argument.
pub(crate) fn func(f: Func, arg: Expr) -> Expr {
    if let Some(q) = arg.as_const() {
        match f {
            Func::Sin if q.is_zero() => return Expr::zero(),
            Func::Cos | Func::Exp if q.is_zero() => return Expr::one(),
            Func::Sqrt => {
                if let (Some(a), Some(b)) = (exact_sqrt(q.numer()), exact_sqrt(q.denom())) {
                    return Expr::constant(BigRational::new(a, b));
                }
            }
            _ => {}
        }
    }
    Expr::apply(f, arg)
}
