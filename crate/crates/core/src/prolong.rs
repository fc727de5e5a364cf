//! Diagonal prolongation to m-fold product charts.
//!
//! Copy `a` (counted from 1) of a coordinate `x` is named `x_a`. Time is
//! shared by all copies and never renamed.

use std::sync::Arc;

use crate::expr::{DomainBox, Expr, ExprError, Parser, Symbol};
use crate::geom::{Chart, GeomError, OneForm, TwoForm, VectorField};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProlongError {
    #[error("a product needs at least one copy")]
    NoCopies,
    #[error("copy name `{0}` collides with another coordinate")]
    Collision(String),
    #[error("object does not live on the base chart")]
    ChartMismatch,
    #[error("expected {expected} values per copy, got {got}")]
    PointShape { expected: usize, got: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

impl From<ExprError> for ProlongError {
    fn from(e: ExprError) -> Self {
        ProlongError::Geom(GeomError::Expr(e))
    }
}

pub type Result<T> = std::result::Result<T, ProlongError>;

/// The name of copy `a` of `base`.
pub fn copy_name(base: &str, a: usize) -> String {
    format!("{base}_{a}")
}

/// `N^m` with coordinates `x_a` and a box made of one copy of the base box
/// per factor, plus any cross-copy exclusions.
#[derive(Debug, Clone)]
pub struct ProductChart {
    base: Arc<Chart>,
    m: usize,
    chart: Arc<Chart>,
    /// `renames[a][l]` is the symbol of coordinate `l` in copy `a`.
    renames: Vec<Vec<Symbol>>,
}

impl ProductChart {
    pub fn new(base: &Arc<Chart>, m: usize) -> Result<Self> {
        Self::with_exclusions(base, m, &[] as &[&str])
    }

    /// `cross` are expression strings over the product coordinates that must
    /// stay away from zero, e.g. `v_1*a_2 - v_2*a_1`.
    pub fn with_exclusions<S: AsRef<str>>(base: &Arc<Chart>, m: usize, cross: &[S]) -> Result<Self> {
        if m == 0 {
            return Err(ProlongError::NoCopies);
        }
        let mut names: Vec<String> = Vec::with_capacity(m * base.dim());
        let mut renames = Vec::with_capacity(m);
        for a in 1..=m {
            let mut row = Vec::with_capacity(base.dim());
            for s in base.symbols() {
                let n = copy_name(s.as_str(), a);
                if names.contains(&n) || base.index_of(&n).is_some() {
                    return Err(ProlongError::Collision(n));
                }
                row.push(Symbol::new(&n));
                names.push(n);
            }
            renames.push(row);
        }

        let dom = base.domain();
        let mut b = DomainBox::builder().margin(dom.margin());
        for (s, lo, hi) in dom.intervals() {
            match base.index_of(s.as_str()) {
                Some(l) => {
                    for row in &renames {
                        b = b.interval(row[l].clone(), *lo, *hi);
                    }
                }
                None => b = b.interval(s.clone(), *lo, *hi),
            }
        }
        for e in dom.exclusions() {
            for r in &renames {
                b = b.exclude(rename_with(base, r, e));
            }
        }
        let parser = Parser::new(&names);
        for src in cross {
            b = b.exclude(parser.parse(src.as_ref())?);
        }
        let chart = Chart::new(&names, b.build()?)?;
        Ok(ProductChart {
            base: base.clone(),
            m,
            chart,
            renames,
        })
    }

    pub fn base(&self) -> &Arc<Chart> {
        &self.base
    }

    pub fn copies(&self) -> usize {
        self.m
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// Index of coordinate `l` of copy `a` (1-based copy) in the product.
    pub fn index(&self, a: usize, l: usize) -> usize {
        (a - 1) * self.base.dim() + l
    }

    /// `e` with every base coordinate replaced by its copy-`a` symbol.
    pub fn rename(&self, e: &Expr, a: usize) -> Expr {
        rename_with(&self.base, &self.renames[a - 1], e)
    }

    /// Concatenates one base point per copy.
    pub fn join(&self, parts: &[&[f64]]) -> Result<Vec<f64>> {
        if parts.len() != self.m {
            return Err(ProlongError::PointShape {
                expected: self.m,
                got: parts.len(),
            });
        }
        let n = self.base.dim();
        let mut out = Vec::with_capacity(n * self.m);
        for p in parts {
            if p.len() != n {
                return Err(ProlongError::PointShape {
                    expected: n,
                    got: p.len(),
                });
            }
            out.extend_from_slice(p);
        }
        Ok(out)
    }

    /// Inverse of [`ProductChart::join`].
    pub fn split<'a>(&self, p: &'a [f64]) -> Result<Vec<&'a [f64]>> {
        let n = self.base.dim();
        if p.len() != n * self.m {
            return Err(ProlongError::PointShape {
                expected: n * self.m,
                got: p.len(),
            });
        }
        Ok(p.chunks(n).collect())
    }
}

fn rename_with(base: &Chart, row: &[Symbol], e: &Expr) -> Expr {
    e.substitute(&|s: &Symbol| base.index_of(s.as_str()).map(|l| Expr::var(row[l].clone())))
}

/// `f(x_1) + ... + f(x_m)`.
pub fn prolong_function(pc: &ProductChart, f: &Expr) -> Expr {
    Expr::sum((1..=pc.m).map(|a| pc.rename(f, a)).collect()).simplify()
}

/// Each copy of `x` gets the components of `X` evaluated on that copy.
pub fn prolong_field(pc: &ProductChart, x: &VectorField) -> Result<VectorField> {
    if !x.chart().same_as(&pc.base) {
        return Err(ProlongError::ChartMismatch);
    }
    let comps = (1..=pc.m)
        .flat_map(|a| x.components().iter().map(move |c| pc.rename(c, a)))
        .collect();
    Ok(VectorField::new(&pc.chart, comps)?)
}

pub fn prolong_one_form(pc: &ProductChart, theta: &OneForm) -> Result<OneForm> {
    if !theta.chart().same_as(&pc.base) {
        return Err(ProlongError::ChartMismatch);
    }
    let coeffs = (1..=pc.m)
        .flat_map(|a| theta.coefficients().iter().map(move |c| pc.rename(c, a)))
        .collect();
    Ok(OneForm::new(&pc.chart, coeffs)?)
}

/// Block-diagonal: copy `a` of each entry sits on the copy-`a` coordinates.
pub fn prolong_two_form(pc: &ProductChart, omega: &TwoForm) -> Result<TwoForm> {
    if !omega.chart().same_as(&pc.base) {
        return Err(ProlongError::ChartMismatch);
    }
    let mut entries = Vec::new();
    for a in 1..=pc.m {
        for (l, m, c) in omega.entries() {
            entries.push((pc.index(a, l), pc.index(a, m), pc.rename(c, a)));
        }
    }
    Ok(TwoForm::from_entries(&pc.chart, entries)?)
}
