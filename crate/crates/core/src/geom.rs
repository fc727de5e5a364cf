//! Exterior calculus on a single coordinate chart.
//!
//! Two-forms are stored as their strictly upper triangular coefficient table
//! `c[l][m]`, `l < m`, meaning `sum c[l][m] dx^l ^ dx^m`. Index access through
//! [`TwoForm::coeff`] returns the full antisymmetric matrix entry.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::expr::{DomainBox, Env, Expr, ExprError, Parser, Symbol, ZeroTest, TIME};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("invalid index pair ({0}, {1})")]
    InvalidIndex(usize, usize),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;

/// Ordered coordinate symbols with a sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    symbols: Vec<Symbol>,
    domain: DomainBox,
    sampling: DomainBox,
}

impl Chart {
    /// The domain must give an interval for every coordinate. If it has no
    /// interval for `t`, identity checks sample `t` from `[0, 1]`.
    pub fn new<S: AsRef<str>>(symbols: &[S], domain: DomainBox) -> Result<Arc<Chart>> {
        let mut syms: Vec<Symbol> = Vec::with_capacity(symbols.len());
        for s in symbols {
            let s = s.as_ref();
            if s == TIME {
                return Err(GeomError::InvalidChart("`t` is reserved for time".into()));
            }
            let valid = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(GeomError::InvalidChart(format!("`{s}` is not an identifier")));
            }
            if syms.iter().any(|x| x.as_str() == s) {
                return Err(GeomError::InvalidChart(format!("duplicate coordinate `{s}`")));
            }
            if domain.interval(s).is_none() {
                return Err(GeomError::InvalidChart(format!("no sampling interval for `{s}`")));
            }
            syms.push(Symbol::new(s));
        }
        let sampling = if domain.interval(TIME).is_some() {
            domain.clone()
        } else {
            domain.extended([(Symbol::new(TIME), 0.0, 1.0)], [])?
        };
        Ok(Arc::new(Chart {
            symbols: syms,
            domain,
            sampling,
        }))
    }

    pub fn dim(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> &Symbol {
        &self.symbols[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.as_str() == name)
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    /// The domain plus a time interval; used by every identity check.
    pub fn sampling_domain(&self) -> &DomainBox {
        &self.sampling
    }

    pub fn parser(&self) -> Parser {
        Parser::new(&self.names())
    }

    pub fn parse(&self, src: &str) -> Result<Expr> {
        Ok(self.parser().parse(src)?)
    }

    pub fn names(&self) -> Vec<&str> {
        self.symbols.iter().map(Symbol::as_str).collect()
    }

    pub fn same_as(&self, other: &Chart) -> bool {
        self.symbols == other.symbols
    }

    pub fn domain_json(&self) -> DomainJson {
        DomainJson::from_box(&self.domain)
    }
}

/// Serialized sampling box: intervals plus exclusion expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainJson {
    pub intervals: Vec<IntervalJson>,
    #[serde(default)]
    pub exclusions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalJson {
    pub symbol: String,
    pub lo: f64,
    pub hi: f64,
}

impl DomainJson {
    pub fn from_box(dom: &DomainBox) -> Self {
        DomainJson {
            intervals: dom
                .intervals()
                .iter()
                .map(|(s, lo, hi)| IntervalJson {
                    symbol: s.to_string(),
                    lo: *lo,
                    hi: *hi,
                })
                .collect(),
            exclusions: dom.exclusions().iter().map(Expr::to_string).collect(),
            margin: Some(dom.margin()),
        }
    }

    /// Exclusions are parsed over the interval symbols.
    pub fn to_box(&self) -> Result<DomainBox> {
        let names: Vec<&str> = self.intervals.iter().map(|i| i.symbol.as_str()).collect();
        let parser = Parser::new(&names);
        let mut b = DomainBox::builder();
        for i in &self.intervals {
            b = b.interval(i.symbol.as_str(), i.lo, i.hi);
        }
        for e in &self.exclusions {
            b = b.exclude(parser.parse(e)?);
        }
        if let Some(m) = self.margin {
            b = b.margin(m);
        }
        Ok(b.build()?)
    }
}

fn check_same(a: &Chart, b: &Chart) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(GeomError::ChartMismatch)
    }
}

fn all_zero(exprs: &[Expr], chart: &Chart, zt: &mut ZeroTest) -> Result<bool> {
    for e in exprs {
        if !zt.is_zero(e, chart.sampling_domain())? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_count(chart: &Chart, got: usize) -> Result<()> {
    if chart.dim() == got {
        Ok(())
    } else {
        Err(GeomError::ComponentCount {
            expected: chart.dim(),
            got,
        })
    }
}

/// `sum X^l d/dx^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Arc<Chart>,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: &Arc<Chart>, comps: Vec<Expr>) -> Result<Self> {
        check_count(chart, comps.len())?;
        Ok(VectorField {
            chart: chart.clone(),
            comps: comps.iter().map(Expr::simplify).collect(),
        })
    }

    pub fn parse<S: AsRef<str>>(chart: &Arc<Chart>, comps: &[S]) -> Result<Self> {
        let p = chart.parser();
        let comps = comps
            .iter()
            .map(|s| p.parse(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        VectorField::new(chart, comps)
    }

    pub fn zero(chart: &Arc<Chart>) -> Self {
        VectorField {
            chart: chart.clone(),
            comps: vec![Expr::zero(); chart.dim()],
        }
    }

    /// The coordinate field `d/dx^i`.
    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> Self {
        let mut f = VectorField::zero(chart);
        f.comps[i] = Expr::one();
        f
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.comps[i]
    }

    /// The field as a derivation: `X f = sum X^l df/dx^l`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let terms = self
            .comps
            .iter()
            .zip(self.chart.symbols())
            .filter(|(c, _)| !c.is_const_zero())
            .map(|(c, s)| c * f.differentiate(s))
            .collect();
        Expr::sum(terms).simplify()
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        check_same(&self.chart, &other.chart)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect();
        VectorField::new(&self.chart, comps)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        check_same(&self.chart, &other.chart)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect();
        VectorField::new(&self.chart, comps)
    }

    /// Multiplication by a scalar function.
    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|c| (f * c).simplify()).collect(),
        }
    }

    pub fn is_zero(&self, zt: &mut ZeroTest) -> Result<bool> {
        all_zero(&self.comps, &self.chart, zt)
    }

    pub fn equals(&self, other: &VectorField, zt: &mut ZeroTest) -> Result<bool> {
        self.sub(other)?.is_zero(zt)
    }

    pub fn evaluate<E: Env + ?Sized>(&self, env: &E) -> Result<Vec<f64>> {
        Ok(self
            .comps
            .iter()
            .map(|c| c.evaluate(env))
            .collect::<Result<Vec<_>, _>>()?)
    }

    pub fn to_json(&self) -> FieldJson {
        FieldJson {
            chart: self.chart.names().iter().map(|s| s.to_string()).collect(),
            components: self.comps.iter().map(Expr::to_string).collect(),
        }
    }

    pub fn from_json(chart: &Arc<Chart>, json: &FieldJson) -> Result<Self> {
        check_json_chart(chart, &json.chart)?;
        VectorField::parse(chart, &json.components)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, s) in self.comps.iter().zip(self.chart.symbols()) {
            if c.is_const_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}*d/d{s}")?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// `sum theta_l dx^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    chart: Arc<Chart>,
    coeffs: Vec<Expr>,
}

impl OneForm {
    pub fn new(chart: &Arc<Chart>, coeffs: Vec<Expr>) -> Result<Self> {
        check_count(chart, coeffs.len())?;
        Ok(OneForm {
            chart: chart.clone(),
            coeffs: coeffs.iter().map(Expr::simplify).collect(),
        })
    }

    pub fn parse<S: AsRef<str>>(chart: &Arc<Chart>, coeffs: &[S]) -> Result<Self> {
        let p = chart.parser();
        let coeffs = coeffs
            .iter()
            .map(|s| p.parse(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        OneForm::new(chart, coeffs)
    }

    pub fn zero(chart: &Arc<Chart>) -> Self {
        OneForm {
            chart: chart.clone(),
            coeffs: vec![Expr::zero(); chart.dim()],
        }
    }

    /// `dx^i`.
    pub fn coordinate(chart: &Arc<Chart>, i: usize) -> Self {
        let mut f = OneForm::zero(chart);
        f.coeffs[i] = Expr::one();
        f
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coefficient(&self, i: usize) -> &Expr {
        &self.coeffs[i]
    }

    pub fn add(&self, other: &OneForm) -> Result<OneForm> {
        check_same(&self.chart, &other.chart)?;
        let c = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        OneForm::new(&self.chart, c)
    }

    pub fn sub(&self, other: &OneForm) -> Result<OneForm> {
        check_same(&self.chart, &other.chart)?;
        let c = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        OneForm::new(&self.chart, c)
    }

    pub fn scale(&self, f: &Expr) -> OneForm {
        OneForm {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| (f * c).simplify()).collect(),
        }
    }

    /// Pairing with a vector field, `theta(X)`.
    pub fn pair(&self, x: &VectorField) -> Result<Expr> {
        check_same(&self.chart, &x.chart)?;
        let terms = self.coeffs.iter().zip(&x.comps).map(|(a, b)| a * b).collect();
        Ok(Expr::sum(terms).simplify())
    }

    pub fn is_zero(&self, zt: &mut ZeroTest) -> Result<bool> {
        all_zero(&self.coeffs, &self.chart, zt)
    }

    pub fn equals(&self, other: &OneForm, zt: &mut ZeroTest) -> Result<bool> {
        self.sub(other)?.is_zero(zt)
    }

    pub fn to_json(&self) -> OneFormJson {
        OneFormJson {
            chart: self.chart.names().iter().map(|s| s.to_string()).collect(),
            coefficients: self.coeffs.iter().map(Expr::to_string).collect(),
        }
    }

    pub fn from_json(chart: &Arc<Chart>, json: &OneFormJson) -> Result<Self> {
        check_json_chart(chart, &json.chart)?;
        OneForm::parse(chart, &json.coefficients)
    }
}

/// `sum_{l<m} c_{lm} dx^l ^ dx^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    chart: Arc<Chart>,
    // packed strictly-upper-triangular rows
    upper: Vec<Expr>,
}

fn packed(n: usize, l: usize, m: usize) -> usize {
    debug_assert!(l < m && m < n);
    l * n - l * (l + 1) / 2 + (m - l - 1)
}

impl TwoForm {
    pub fn zero(chart: &Arc<Chart>) -> Self {
        let n = chart.dim();
        TwoForm {
            chart: chart.clone(),
            upper: vec![Expr::zero(); n * n.saturating_sub(1) / 2],
        }
    }

    /// Builds a form from `(l, m, c)` triples meaning `c dx^l ^ dx^m`.
    /// Pairs with `l > m` contribute `-c` to the `(m, l)` slot; repeated
    /// pairs add up.
    pub fn from_entries(chart: &Arc<Chart>, entries: impl IntoIterator<Item = (usize, usize, Expr)>) -> Result<Self> {
        let n = chart.dim();
        let mut acc: Vec<Vec<Expr>> = vec![Vec::new(); n * n.saturating_sub(1) / 2];
        for (l, m, c) in entries {
            if l == m || l >= n || m >= n {
                return Err(GeomError::InvalidIndex(l, m));
            }
            if l < m {
                acc[packed(n, l, m)].push(c);
            } else {
                acc[packed(n, m, l)].push(-c);
            }
        }
        Ok(TwoForm {
            chart: chart.clone(),
            upper: acc.into_iter().map(|t| Expr::sum(t).simplify()).collect(),
        })
    }

    /// Parses `(l, m, "expr")` triples.
    pub fn parse<S: AsRef<str>>(chart: &Arc<Chart>, entries: &[(usize, usize, S)]) -> Result<Self> {
        let p = chart.parser();
        let parsed = entries
            .iter()
            .map(|(l, m, s)| Ok((*l, *m, p.parse(s.as_ref())?)))
            .collect::<Result<Vec<_>>>()?;
        TwoForm::from_entries(chart, parsed)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// Full antisymmetric entry `omega_{lm}`.
    pub fn coeff(&self, l: usize, m: usize) -> Expr {
        let n = self.chart.dim();
        match l.cmp(&m) {
            std::cmp::Ordering::Equal => Expr::zero(),
            std::cmp::Ordering::Less => self.upper[packed(n, l, m)].clone(),
            std::cmp::Ordering::Greater => (-&self.upper[packed(n, m, l)]).simplify(),
        }
    }

    /// Nonzero stored entries `(l, m, c)` with `l < m`.
    pub fn entries(&self) -> Vec<(usize, usize, &Expr)> {
        let n = self.chart.dim();
        let mut out = Vec::new();
        for l in 0..n {
            for m in l + 1..n {
                let c = &self.upper[packed(n, l, m)];
                if !c.is_const_zero() {
                    out.push((l, m, c));
                }
            }
        }
        out
    }

    fn zip_with(&self, other: &TwoForm, f: impl Fn(&Expr, &Expr) -> Expr) -> Result<TwoForm> {
        check_same(&self.chart, &other.chart)?;
        Ok(TwoForm {
            chart: self.chart.clone(),
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| f(a, b).simplify())
                .collect(),
        })
    }

    pub fn add(&self, other: &TwoForm) -> Result<TwoForm> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TwoForm) -> Result<TwoForm> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, f: &Expr) -> TwoForm {
        TwoForm {
            chart: self.chart.clone(),
            upper: self.upper.iter().map(|c| (f * c).simplify()).collect(),
        }
    }

    pub fn is_zero(&self, zt: &mut ZeroTest) -> Result<bool> {
        all_zero(&self.upper, &self.chart, zt)
    }

    pub fn equals(&self, other: &TwoForm, zt: &mut ZeroTest) -> Result<bool> {
        self.sub(other)?.is_zero(zt)
    }

    /// The full antisymmetric coefficient matrix at a point.
    pub fn matrix_at<E: Env + ?Sized>(&self, env: &E) -> Result<DMatrix<f64>> {
        let n = self.chart.dim();
        let mut m = DMatrix::zeros(n, n);
        for l in 0..n {
            for k in l + 1..n {
                let v = self.upper[packed(n, l, k)].evaluate(env)?;
                m[(l, k)] = v;
                m[(k, l)] = -v;
            }
        }
        Ok(m)
    }

    /// Rewrites every coefficient, keeping the chart.
    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> TwoForm {
        TwoForm {
            chart: self.chart.clone(),
            upper: self.upper.iter().map(|c| f(c).simplify()).collect(),
        }
    }

    pub fn to_json(&self) -> TwoFormJson {
        TwoFormJson {
            chart: self.chart.names().iter().map(|s| s.to_string()).collect(),
            entries: self
                .entries()
                .into_iter()
                .map(|(i, j, c)| EntryJson {
                    i,
                    j,
                    coeff: c.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(chart: &Arc<Chart>, json: &TwoFormJson) -> Result<Self> {
        check_json_chart(chart, &json.chart)?;
        let entries: Vec<_> = json.entries.iter().map(|e| (e.i, e.j, e.coeff.as_str())).collect();
        TwoForm::parse(chart, &entries)
    }
}

impl fmt::Display for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries = self.entries();
        if entries.is_empty() {
            return f.write_str("0");
        }
        let s = self.chart.symbols();
        for (k, (l, m, c)) in entries.into_iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*d{}^d{}", s[l], s[m])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    pub chart: Vec<String>,
    pub components: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneFormJson {
    pub chart: Vec<String>,
    pub coefficients: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub i: usize,
    pub j: usize,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoFormJson {
    pub chart: Vec<String>,
    pub entries: Vec<EntryJson>,
}

fn check_json_chart(chart: &Chart, names: &[String]) -> Result<()> {
    if chart.names().iter().copied().eq(names.iter().map(String::as_str)) {
        Ok(())
    } else {
        Err(GeomError::ChartMismatch)
    }
}

/// `[X, Y]^l = sum_m (X^m dY^l/dx^m - Y^m dX^l/dx^m)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    check_same(&x.chart, &y.chart)?;
    let comps = x
        .comps
        .iter()
        .zip(&y.comps)
        .map(|(xl, yl)| x.apply(yl) - y.apply(xl))
        .collect();
    VectorField::new(&x.chart, comps)
}

/// `df`.
pub fn exterior_derivative_0(f: &Expr, chart: &Arc<Chart>) -> OneForm {
    OneForm {
        chart: chart.clone(),
        coeffs: chart.symbols().iter().map(|s| f.differentiate(s)).collect(),
    }
}

/// `d theta`, coefficient `(l, m)` equal to `d theta_m/dx^l - d theta_l/dx^m`.
pub fn exterior_derivative_1(theta: &OneForm) -> TwoForm {
    let chart = &theta.chart;
    let n = chart.dim();
    let s = chart.symbols();
    let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for l in 0..n {
        for m in l + 1..n {
            let c = theta.coeffs[m].differentiate(&s[l]) - theta.coeffs[l].differentiate(&s[m]);
            upper.push(c.simplify());
        }
    }
    TwoForm {
        chart: chart.clone(),
        upper,
    }
}

/// Fully antisymmetric coefficient of `d omega` on `(l, m, p)`.
fn d2_coeff(omega: &TwoForm, l: usize, m: usize, p: usize) -> Expr {
    let s = omega.chart.symbols();
    let terms = vec![
        omega.coeff(m, p).differentiate(&s[l]),
        omega.coeff(p, l).differentiate(&s[m]),
        omega.coeff(l, m).differentiate(&s[p]),
    ];
    Expr::sum(terms).simplify()
}

/// First index triple `l < m < p` on which `d omega` fails the zero test.
pub fn closedness_violation(omega: &TwoForm, zt: &mut ZeroTest) -> Result<Option<(usize, usize, usize)>> {
    let n = omega.chart.dim();
    let dom = omega.chart.sampling_domain();
    for l in 0..n {
        for m in l + 1..n {
            for p in m + 1..n {
                if !zt.is_zero(&d2_coeff(omega, l, m, p), dom)? {
                    return Ok(Some((l, m, p)));
                }
            }
        }
    }
    Ok(None)
}

pub fn is_closed(omega: &TwoForm, zt: &mut ZeroTest) -> Result<bool> {
    Ok(closedness_violation(omega, zt)?.is_none())
}

/// `(i_X omega)_m = sum_l X^l omega_{lm}`.
pub fn interior_product(x: &VectorField, omega: &TwoForm) -> Result<OneForm> {
    check_same(&x.chart, &omega.chart)?;
    let n = x.chart.dim();
    let coeffs = (0..n)
        .map(|m| {
            let terms = (0..n)
                .filter(|&l| !x.comps[l].is_const_zero())
                .map(|l| &x.comps[l] * omega.coeff(l, m))
                .collect();
            Expr::sum(terms)
        })
        .collect();
    OneForm::new(&x.chart, coeffs)
}

/// `L_X omega = i_X d omega + d i_X omega`.
pub fn lie_derivative_2(x: &VectorField, omega: &TwoForm) -> Result<TwoForm> {
    let exact = exterior_derivative_1(&interior_product(x, omega)?);
    let n = x.chart.dim();
    let mut contracted = Vec::new();
    for m in 0..n {
        for p in m + 1..n {
            for l in 0..n {
                if l == m || l == p || x.comps[l].is_const_zero() {
                    continue;
                }
                let c = d2_coeff(omega, l, m, p);
                if !c.is_const_zero() {
                    contracted.push((m, p, &x.comps[l] * c));
                }
            }
        }
    }
    exact.add(&TwoForm::from_entries(&x.chart, contracted)?)
}

/// `alpha ^ beta`, coefficient `(l, m)` equal to `alpha_l beta_m - alpha_m beta_l`.
pub fn wedge(alpha: &OneForm, beta: &OneForm) -> Result<TwoForm> {
    check_same(&alpha.chart, &beta.chart)?;
    let n = alpha.chart.dim();
    let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for l in 0..n {
        for m in l + 1..n {
            let c = &alpha.coeffs[l] * &beta.coeffs[m] - &alpha.coeffs[m] * &beta.coeffs[l];
            upper.push(c.simplify());
        }
    }
    Ok(TwoForm {
        chart: alpha.chart.clone(),
        upper,
    })
}
