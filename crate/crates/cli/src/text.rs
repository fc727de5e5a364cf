//! Small formatting helpers shared by the reports.

use std::fmt::Write;

use kslie::expr::Point;
use kslie::liealg::format_rational;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

const SUB: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

fn digits(n: usize, table: &[char; 10]) -> String {
    n.to_string().bytes().map(|b| table[(b - b'0') as usize]).collect()
}

pub fn sub(n: usize) -> String {
    digits(n, &SUB)
}

pub fn sup(n: usize) -> String {
    digits(n, &SUP)
}

/// `sym` with a 1-based subscript for the 0-based index `i`.
pub fn indexed(sym: &str, i: usize) -> String {
    format!("{sym}{}", sub(i + 1))
}

/// `2Y₂ - Y₃`, or `0` when every coefficient vanishes.
pub fn combination(sym: &str, coeffs: &[BigRational]) -> String {
    let mut out = String::new();
    for (g, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let a = c.abs();
        if !a.is_one() {
            if a.is_integer() {
                out.push_str(&format_rational(&a));
            } else {
                let _ = write!(out, "({})", format_rational(&a));
            }
        }
        out.push_str(&indexed(sym, g));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// `(x=0.1, v=-1.2)`.
pub fn point(p: &Point) -> String {
    let inner: Vec<String> = p.iter().map(|(s, v)| format!("{s}={v:.6}")).collect();
    format!("({})", inner.join(", "))
}

pub fn mark(pass: bool) -> &'static str {
    if pass {
        "✓"
    } else {
        "✗"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn subscripts() {
        assert_eq!(indexed("Y", 0), "Y₁");
        assert_eq!(sub(12), "₁₂");
        assert_eq!(sup(3), "³");
    }

    #[test]
    fn combinations() {
        assert_eq!(combination("Y", &[q(1, 1), q(0, 1), q(0, 1)]), "Y₁");
        assert_eq!(combination("X", &[q(0, 1), q(-4, 1), q(1, 2)]), "-4X₂ + (1/2)X₃");
        assert_eq!(combination("X", &[q(0, 1), q(0, 1)]), "0");
        assert_eq!(combination("X", &[q(2, 1), q(-1, 1)]), "2X₁ - X₂");
    }
}
