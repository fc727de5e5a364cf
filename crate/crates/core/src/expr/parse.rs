//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' ['-'] integer)*        (right associative)
//! base   := number | ident | '(' expr ')' | '-' base | func '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp' | 'sqrt'
//! number := integer ('/' integer)? | decimal
//! ```
//!
//! Decimal literals such as `0.25` are read as exact rationals.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, ToPrimitive, Zero};

use super::{Expr, ExprError, Func, Node, Symbol, TIME};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Decimal(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'/' => out.push((start, Tok::Slash)),
            b'^' => out.push((start, Tok::Caret)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let int_part = &src[start..i];
                if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                    let frac_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let frac = &src[frac_start..i];
                    let digits: BigInt = format!("{int_part}{frac}").parse().unwrap();
                    let scale = BigInt::from(10u32).pow(frac.len() as u32);
                    out.push((start, Tok::Decimal(BigRational::new(digits, scale))));
                } else {
                    out.push((start, Tok::Int(int_part.parse().unwrap())));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap();
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
        i += 1;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

/// Parser configured with the set of admissible identifiers.
#[derive(Debug, Clone, Default)]
pub struct Parser {
    allowed: BTreeSet<String>,
}

impl Parser {
    /// Chart symbols plus the time symbol `t`.
    pub fn new<S: AsRef<str>>(chart: &[S]) -> Self {
        let mut allowed: BTreeSet<String> = chart.iter().map(|s| s.as_ref().to_string()).collect();
        allowed.insert(TIME.to_string());
        Parser { allowed }
    }

    /// Additional declared parameters (coefficient names, multipliers).
    pub fn with_params<S: AsRef<str>>(mut self, params: &[S]) -> Self {
        self.allowed.extend(params.iter().map(|s| s.as_ref().to_string()));
        self
    }

    pub fn parse(&self, src: &str) -> Result<Expr, ExprError> {
        let toks = lex(src)?;
        let mut st = State {
            toks,
            pos: 0,
            allowed: &self.allowed,
            after_slash: false,
        };
        let e = st.expr()?;
        match st.peek() {
            Tok::End => Ok(e),
            _ => Err(st.error("unexpected trailing input")),
        }
    }
}

/// Parse `src` over `chart` (plus `t`).
pub fn parse<S: AsRef<str>>(src: &str, chart: &[S]) -> Result<Expr, ExprError> {
    Parser::new(chart).parse(src)
}

struct State<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    allowed: &'a BTreeSet<String>,
    // set while parsing the right operand of `/`, where `p/q` must not fuse
    after_slash: bool,
}

impl State<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[idx].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.offset(),
            message: message.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = acc + rhs;
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = acc - rhs;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = acc * rhs;
                }
                Tok::Slash => {
                    self.bump();
                    self.after_slash = true;
                    let rhs = self.factor();
                    self.after_slash = false;
                    let rhs = rhs?;
                    acc = acc / rhs;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let exps = self.exponent_chain()?;
        Ok(base.pow(exps))
    }

    /// Consumes `^ n (^ m ...)` and folds it right-associatively.
    fn exponent_chain(&mut self) -> Result<i64, ExprError> {
        let mut exps = Vec::new();
        while *self.peek() == Tok::Caret {
            self.bump();
            let negative = if *self.peek() == Tok::Minus {
                self.bump();
                true
            } else {
                false
            };
            let at = self.offset();
            let n = match self.bump() {
                Tok::Int(n) => n,
                _ => {
                    return Err(ExprError::Syntax {
                        offset: at,
                        message: "exponent must be an integer".into(),
                    })
                }
            };
            let n = n.to_i64().ok_or(ExprError::Syntax {
                offset: at,
                message: "exponent too large".into(),
            })?;
            exps.push((at, if negative { -n } else { n }));
        }
        let (_, mut acc) = exps.pop().unwrap();
        while let Some((at, e)) = exps.pop() {
            let folded = if acc < 0 {
                None
            } else {
                u32::try_from(acc).ok().and_then(|p| e.checked_pow(p))
            };
            acc = folded.ok_or(ExprError::Syntax {
                offset: at,
                message: "exponent tower is not a small integer".into(),
            })?;
        }
        Ok(acc)
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        let fuse = !std::mem::replace(&mut self.after_slash, false);
        match self.bump() {
            Tok::Int(n) => {
                if fuse && *self.peek() == Tok::Slash {
                    if let Tok::Int(d) = self.peek_at(1).clone() {
                        if d.is_zero() {
                            return Err(ExprError::Syntax {
                                offset: self.toks[self.pos + 1].0,
                                message: "zero denominator".into(),
                            });
                        }
                        self.bump();
                        self.bump();
                        return Ok(Expr::constant(BigRational::new(n, d)));
                    }
                }
                Ok(Expr::constant(BigRational::from_integer(n)))
            }
            Tok::Decimal(q) => Ok(Expr::constant(q)),
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() == Tok::LParen {
                        self.bump();
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        return Ok(Expr::apply(func, arg));
                    }
                }
                if self.allowed.contains(&name) {
                    Ok(Expr::from_node(Node::Var(Symbol::from(name))))
                } else {
                    Err(ExprError::UnknownSymbol(name))
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Minus => {
                self.after_slash = !fuse;
                let inner = self.base()?;
                // unary minus binds looser than `^`: -x^2 = -(x^2)
                if *self.peek() == Tok::Caret {
                    let n = self.exponent_chain()?;
                    return Ok(-inner.pow(n));
                }
                Ok(-inner)
            }
            Tok::End => Err(ExprError::Syntax {
                offset: at,
                message: "unexpected end of input".into(),
            }),
            _ => Err(ExprError::Syntax {
                offset: at,
                message: "expected a number, identifier or `(`".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{DomainBox, ZeroTest};

    fn chart3() -> [&'static str; 3] {
        ["x", "v", "a"]
    }

    #[test]
    fn rational_literal_in_product() {
        let e = parse("3/2 * a^2 / v", &chart3()).unwrap();
        // ((3/2 * a^2) / v)
        match e.node() {
            Node::Div(num, den) => {
                assert_eq!(*den, Expr::var("v"));
                match num.node() {
                    Node::Mul(fs) => {
                        assert_eq!(fs[0], Expr::rational(3, 2));
                        assert_eq!(fs[1], Expr::var("a").pow(2));
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn atom() {
        assert_eq!(parse("x", &chart3()).unwrap(), Expr::var("x"));
    }

    #[test]
    fn schwarzian_constant_parses_and_evaluates() {
        let chart = ["a1", "a2", "v1", "v2"];
        let e = parse("(a2*v1 - a1*v2)^2 / (v1^3 * v2^3)", &chart).unwrap();
        let p = [("a1", 1.0), ("a2", 2.0), ("v1", 1.0), ("v2", 1.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<std::collections::HashMap<_, _>>();
        assert_eq!(e.evaluate(&p).unwrap(), 1.0);
    }

    #[test]
    fn associativity() {
        let c = ["x"];
        // left-assoc subtraction and division
        let e = parse("8 - 4 - 2", &c).unwrap().simplify();
        assert_eq!(e, Expr::int(2));
        let e = parse("x / 2 / 2", &c).unwrap().simplify();
        assert_eq!(e, (Expr::rational(1, 4) * Expr::var("x")).simplify());
        let e = parse("12 / 3/2", &c).unwrap().simplify();
        assert_eq!(e, Expr::int(2));
        let e = parse("x / -3/2", &c).unwrap().simplify();
        assert_eq!(e, (Expr::rational(-1, 6) * Expr::var("x")).simplify());
        // right-assoc power tower: 2^3^2 = 2^9
        let e = parse("2^3^2", &c).unwrap().simplify();
        assert_eq!(e, Expr::int(512));
    }

    #[test]
    fn unary_minus_and_power() {
        let e = parse("-x^2", &["x"]).unwrap();
        let p: std::collections::HashMap<String, f64> = [("x".to_string(), 3.0)].into();
        assert_eq!(e.evaluate(&p).unwrap(), -9.0);
        let e = parse("x^-2", &["x"]).unwrap();
        assert_eq!(e.evaluate(&p).unwrap(), 1.0 / 9.0);
    }

    #[test]
    fn decimals_are_exact() {
        let e = parse("0.25", &["x"]).unwrap();
        assert_eq!(e, Expr::rational(1, 4));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("x + * v", &chart3()) {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse("(x + v", &chart3()) {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("unexpected {other:?}"),
        }
        match parse("x $ v", &chart3()) {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("x^y", &chart3()),
            Err(ExprError::Syntax { offset: 2, .. })
        ));
        assert!(matches!(parse("1/0", &chart3()), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn unknown_symbols_are_reported() {
        assert_eq!(parse("x + q", &chart3()), Err(ExprError::UnknownSymbol("q".into())));
        let p = Parser::new(&chart3()).with_params(&["q"]);
        assert!(p.parse("x + q").is_ok());
    }

    #[test]
    fn time_is_always_allowed() {
        assert!(parse("sin(t) * v", &chart3()).is_ok());
    }

    #[test]
    fn function_names_need_parentheses() {
        assert_eq!(parse("sin", &chart3()), Err(ExprError::UnknownSymbol("sin".into())));
        let e = parse("sqrt(v) * sqrt(v) - v", &chart3()).unwrap();
        let dom = DomainBox::builder()
            .interval("x", -1.0, 1.0)
            .interval("v", 0.1, 3.0)
            .interval("a", -1.0, 1.0)
            .build()
            .unwrap();
        assert!(ZeroTest::new(1).is_zero(&e, &dom).unwrap());
    }
}
