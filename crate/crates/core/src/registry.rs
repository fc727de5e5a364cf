//! Built-in worked examples, stored as expression strings.
//!
//! All indices in [`RecordJson`] are 0-based: fields, forms, coordinates.
//! Reports print fields 1-based (`X1`, `X2`, ...).

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::expr::{Expr, ExprError, Parser, Symbol, ZeroTest};
use crate::geom::{Chart, DomainJson, EntryJson, GeomError, IntervalJson, TwoForm, VectorField};
use crate::ksymp::{
    product_witness, validate_structure, KSymplecticStructure, KsympError, OmegaHamiltonian, ProductWitness,
};
use crate::motion::{schwarzian_invariant_sources, MotionError, TDependentField};
use crate::prolong::{ProductChart, ProlongError};

pub const IDS: [&str; 6] = [
    "schwarz3ks",
    "riccati4",
    "control1",
    "control2",
    "diffusion-rs",
    "lotka-volterra",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("record `{id}` is inconsistent: {why}")]
    Inconsistent { id: String, why: String },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Ksymp(#[from] KsympError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Prolong(#[from] ProlongError),
}

impl From<ExprError> for RegistryError {
    fn from(e: ExprError) -> Self {
        RegistryError::Geom(GeomError::Expr(e))
    }
}

pub type Result<T> = std::result::Result<T, RegistryError>;

/// `coeff * X_field`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub field: usize,
}

/// `[X_a, X_b] = sum terms`; pairs not listed bracket to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketJson {
    pub a: usize,
    pub b: usize,
    pub terms: Vec<TermJson>,
}

/// `{h_a, h_b} = coeff * h_c`, componentwise under the Omega bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonJson {
    pub a: usize,
    pub b: usize,
    pub coeff: String,
    pub c: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamJson {
    pub name: String,
    pub default: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantJson {
    pub label: String,
    pub expr: String,
    /// 1 for the base chart, m for the m-fold product chart.
    pub copies: usize,
}

/// A printed value that disagrees with the verified one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErratumJson {
    pub item: String,
    pub printed: String,
    pub used: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordJson {
    pub id: String,
    pub title: String,
    pub chart: Vec<String>,
    pub domain: DomainJson,
    pub fields: Vec<Vec<String>>,
    pub forms: Vec<Vec<EntryJson>>,
    /// `hamiltonians[a][i]` is `h` with `i_{X_a} w_i = dh`.
    pub hamiltonians: Vec<Vec<String>>,
    /// Fields spanning the kernel of each form.
    #[serde(default)]
    pub kernels: Vec<Vec<Vec<String>>>,
    pub constants: Vec<BracketJson>,
    #[serde(default)]
    pub bracket_table: Vec<PoissonJson>,
    #[serde(default)]
    pub parameters: Vec<ParamJson>,
    /// The t-dependent system as a combination of the fields, with
    /// coefficients in `t` and the parameter names.
    pub system: Vec<TermJson>,
    #[serde(default)]
    pub invariants: Vec<InvariantJson>,
    /// Extra exclusions on the two-fold product chart.
    #[serde(default)]
    pub cross_exclusions: Vec<String>,
    /// Invariants on the two-fold product are undefined where this vanishes.
    #[serde(default)]
    pub degeneracy: Option<String>,
    #[serde(default)]
    pub errata: Vec<ErratumJson>,
    /// Letter used when printing fields.
    #[serde(default = "default_field_symbol")]
    pub field_symbol: String,
    /// One base state per copy, used for default integrations.
    #[serde(default)]
    pub initial_conditions: Vec<Vec<f64>>,
}

fn default_field_symbol() -> String {
    "X".into()
}

#[derive(Debug, Clone)]
pub struct Invariant {
    pub label: String,
    pub expr: Expr,
    pub copies: usize,
}

/// A compiled record.
#[derive(Debug, Clone)]
pub struct ExampleRecord {
    source: RecordJson,
    chart: Arc<Chart>,
    fields: Vec<VectorField>,
    forms: Vec<TwoForm>,
    hamiltonians: Vec<Vec<Expr>>,
    kernels: Vec<Vec<VectorField>>,
    /// `constants[a][b][g]`.
    constants: Vec<Vec<Vec<BigRational>>>,
    bracket_table: Vec<(usize, usize, Expr, usize)>,
    params: Vec<(Symbol, Expr)>,
    system: Vec<(Expr, usize)>,
}

fn rational(src: &str) -> std::result::Result<BigRational, ExprError> {
    let e = Parser::new(&[] as &[&str]).parse(src)?.simplify();
    e.as_const().cloned().ok_or_else(|| ExprError::Syntax {
        offset: 0,
        message: format!("`{src}` is not a rational constant"),
    })
}

impl ExampleRecord {
    pub fn from_json(source: RecordJson) -> Result<Self> {
        let bad = |why: String| RegistryError::Inconsistent {
            id: source.id.clone(),
            why,
        };
        let chart = Chart::new(&source.chart, source.domain.to_box()?)?;
        let fields = source
            .fields
            .iter()
            .map(|f| VectorField::parse(&chart, f))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let r = fields.len();
        if r == 0 {
            return Err(bad("no fields".into()));
        }
        if source.initial_conditions.iter().any(|x| x.len() != chart.dim()) {
            return Err(bad(format!("initial conditions must have {} entries", chart.dim())));
        }
        let forms = source
            .forms
            .iter()
            .map(|w| {
                TwoForm::parse(
                    &chart,
                    &w.iter().map(|e| (e.i, e.j, e.coeff.as_str())).collect::<Vec<_>>(),
                )
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let k = forms.len();
        if source.hamiltonians.len() != r || source.hamiltonians.iter().any(|row| row.len() != k) {
            return Err(bad(format!("hamiltonian table must be {r} x {k}")));
        }
        let hamiltonians = source
            .hamiltonians
            .iter()
            .map(|row| row.iter().map(|h| chart.parse(h)).collect())
            .collect::<std::result::Result<Vec<Vec<_>>, _>>()?;
        if !source.kernels.is_empty() && source.kernels.len() != k {
            return Err(bad(format!("kernel list must have {k} entries")));
        }
        let kernels = source
            .kernels
            .iter()
            .map(|ker| ker.iter().map(|z| VectorField::parse(&chart, z)).collect())
            .collect::<std::result::Result<Vec<Vec<_>>, _>>()?;

        let mut constants = vec![vec![vec![BigRational::zero(); r]; r]; r];
        for br in &source.constants {
            if br.a >= r || br.b >= r || br.a == br.b {
                return Err(bad(format!("bracket ({}, {}) out of range", br.a, br.b)));
            }
            for t in &br.terms {
                if t.field >= r {
                    return Err(bad(format!("term field {} out of range", t.field)));
                }
                let c = rational(&t.coeff)?;
                constants[br.a][br.b][t.field] += c.clone();
                constants[br.b][br.a][t.field] -= c;
            }
        }

        let mut bracket_table = Vec::new();
        for p in &source.bracket_table {
            if p.a >= r || p.b >= r || p.c >= r {
                return Err(bad("bracket table index out of range".into()));
            }
            let c = Parser::new(&[] as &[&str]).parse(&p.coeff)?;
            bracket_table.push((p.a, p.b, c, p.c));
        }

        let pnames: Vec<&str> = source.parameters.iter().map(|p| p.name.as_str()).collect();
        let tparser = Parser::new(&[] as &[&str]);
        let params = source
            .parameters
            .iter()
            .map(|p| Ok((Symbol::new(&p.name), tparser.parse(&p.default)?)))
            .collect::<std::result::Result<Vec<_>, ExprError>>()?;
        let sparser = Parser::new(&[] as &[&str]).with_params(&pnames);
        let system = source
            .system
            .iter()
            .map(|t| {
                if t.field >= r {
                    return Err(bad(format!("system term field {} out of range", t.field)));
                }
                Ok((sparser.parse(&t.coeff)?, t.field))
            })
            .collect::<Result<Vec<_>>>()?;

        let rec = ExampleRecord {
            chart,
            fields,
            forms,
            hamiltonians,
            kernels,
            constants,
            bracket_table,
            params,
            system,
            source,
        };
        rec.invariants()?;
        Ok(rec)
    }

    pub fn id(&self) -> &str {
        &self.source.id
    }

    pub fn title(&self) -> &str {
        &self.source.title
    }

    pub fn source(&self) -> &RecordJson {
        &self.source
    }

    pub fn errata(&self) -> &[ErratumJson] {
        &self.source.errata
    }

    /// `X3` style label of field `a` (0-based).
    pub fn field_label(&self, a: usize) -> String {
        format!("{}{}", self.source.field_symbol, a + 1)
    }

    pub fn field_symbol(&self) -> &str {
        &self.source.field_symbol
    }

    pub fn initial_conditions(&self) -> &[Vec<f64>] {
        &self.source.initial_conditions
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn forms(&self) -> &[TwoForm] {
        &self.forms
    }

    pub fn k(&self) -> usize {
        self.forms.len()
    }

    pub fn hamiltonian(&self, field: usize, form: usize) -> &Expr {
        &self.hamiltonians[field][form]
    }

    /// `(h_a^1, ..., h_a^k)` carrying `X_a` as its field.
    pub fn omega_hamiltonian(&self, field: usize) -> OmegaHamiltonian {
        OmegaHamiltonian::new(self.hamiltonians[field].clone()).with_field(self.fields[field].clone())
    }

    /// Kernel spanning fields of form `i`; empty for nondegenerate forms.
    pub fn kernel(&self, form: usize) -> &[VectorField] {
        self.kernels.get(form).map_or(&[], Vec::as_slice)
    }

    pub fn expected_constant(&self, a: usize, b: usize, g: usize) -> &BigRational {
        &self.constants[a][b][g]
    }

    pub fn expected_bracket(&self, a: usize, b: usize) -> &[BigRational] {
        &self.constants[a][b]
    }

    pub fn bracket_table(&self) -> &[(usize, usize, Expr, usize)] {
        &self.bracket_table
    }

    pub fn structure(&self, samples: usize, zt: &mut ZeroTest) -> Result<KSymplecticStructure> {
        Ok(validate_structure(self.forms.clone(), samples, zt)?)
    }

    pub fn parameters(&self) -> &[(Symbol, Expr)] {
        &self.params
    }

    /// The t-dependent system with default parameters, except those in
    /// `overrides` (expressions in `t`).
    pub fn system(&self, overrides: &[(String, Expr)]) -> Result<TDependentField> {
        for (name, _) in overrides {
            if !self.params.iter().any(|(s, _)| s.as_str() == name) {
                return Err(RegistryError::UnknownParameter(name.clone()));
            }
        }
        let value = |s: &Symbol| {
            overrides
                .iter()
                .rev()
                .find(|(n, _)| n == s.as_str())
                .map(|(_, e)| e.clone())
                .or_else(|| self.params.iter().find(|(p, _)| p == s).map(|(_, e)| e.clone()))
        };
        let basis = self.system.iter().map(|(_, f)| self.fields[*f].clone()).collect();
        let coeffs = self.system.iter().map(|(c, _)| c.substitute(&value)).collect();
        Ok(TDependentField::new(basis, coeffs)?)
    }

    /// The `m`-fold product chart. Cross exclusions apply when `m >= 2`.
    pub fn product_chart(&self, m: usize) -> Result<ProductChart> {
        if m >= 2 {
            Ok(ProductChart::with_exclusions(
                &self.chart,
                m,
                &self.source.cross_exclusions,
            )?)
        } else {
            Ok(ProductChart::new(&self.chart, m)?)
        }
    }

    /// Compiled invariants; product invariants are parsed over the product
    /// chart of the matching size.
    pub fn invariants(&self) -> Result<Vec<Invariant>> {
        let mut out = Vec::new();
        for inv in &self.source.invariants {
            let expr = if inv.copies <= 1 {
                self.chart.parse(&inv.expr)?
            } else {
                self.product_chart(inv.copies)?.chart().parse(&inv.expr)?
            };
            out.push(Invariant {
                label: inv.label.clone(),
                expr,
                copies: inv.copies.max(1),
            });
        }
        Ok(out)
    }

    /// Parsed over the two-fold product chart.
    pub fn degeneracy(&self) -> Result<Option<Expr>> {
        match &self.source.degeneracy {
            None => Ok(None),
            Some(s) => Ok(Some(self.product_chart(2)?.chart().parse(s)?)),
        }
    }
}

fn interval(s: &str, lo: f64, hi: f64) -> IntervalJson {
    IntervalJson {
        symbol: s.to_string(),
        lo,
        hi,
    }
}

fn entry(i: usize, j: usize, c: impl Into<String>) -> EntryJson {
    EntryJson { i, j, coeff: c.into() }
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn rows(xs: &[&[&str]]) -> Vec<Vec<String>> {
    xs.iter().map(|r| strs(r)).collect()
}

fn term(coeff: &str, field: usize) -> TermJson {
    TermJson {
        coeff: coeff.to_string(),
        field,
    }
}

fn bracket(a: usize, b: usize, terms: &[(&str, usize)]) -> BracketJson {
    BracketJson {
        a,
        b,
        terms: terms.iter().map(|(c, f)| term(c, *f)).collect(),
    }
}

fn param(name: &str, default: &str) -> ParamJson {
    ParamJson {
        name: name.into(),
        default: default.into(),
    }
}

fn erratum(item: &str, printed: &str, used: &str) -> ErratumJson {
    ErratumJson {
        item: item.into(),
        printed: printed.into(),
        used: used.into(),
    }
}

fn sl2_table() -> Vec<PoissonJson> {
    [(0, 1, "-1", 0), (0, 2, "-2", 1), (1, 2, "-1", 2)]
        .into_iter()
        .map(|(a, b, c, g)| PoissonJson {
            a,
            b,
            coeff: c.into(),
            c: g,
        })
        .collect()
}

fn box_of(names: &[&str], lo: f64, hi: f64) -> Vec<IntervalJson> {
    names.iter().map(|n| interval(n, lo, hi)).collect()
}

fn schwarz3ks() -> RecordJson {
    let invariants = schwarzian_invariant_sources()
        .into_iter()
        .map(|(l, e)| InvariantJson {
            label: l.into(),
            expr: e,
            copies: 2,
        })
        .collect();
    RecordJson {
        id: "schwarz3ks".into(),
        title: "third-order Kummer-Schwarz equation as a first-order system".into(),
        chart: strs(&["x", "v", "a"]),
        domain: DomainJson {
            intervals: box_of(&["x", "v", "a"], -2.0, 2.0),
            exclusions: strs(&["v"]),
            margin: None,
        },
        fields: rows(&[&["0", "0", "2*v"], &["0", "v", "2*a"], &["v", "a", "3/2*a^2/v"]]),
        forms: vec![
            vec![entry(1, 2, "1/v^3")],
            vec![entry(1, 2, "-2*x/v^3"), entry(2, 0, "-2/v^2"), entry(0, 1, "-2*a/v^3")],
        ],
        hamiltonians: rows(&[
            &["2/v", "-4*x/v"],
            &["a/v^2", "2 - 2*a*x/v^2"],
            &["a^2/(2*v^3)", "2*a/v - a^2*x/v^3"],
        ]),
        kernels: vec![vec![strs(&["1", "0", "0"])], vec![strs(&["x", "v", "a"])]],
        constants: vec![
            bracket(0, 1, &[("1", 0)]),
            bracket(0, 2, &[("2", 1)]),
            bracket(1, 2, &[("1", 2)]),
        ],
        bracket_table: sl2_table(),
        parameters: vec![param("b1", "sin(t)")],
        system: vec![term("1", 2), term("b1", 0)],
        invariants,
        cross_exclusions: strs(&["a_1*v_2 - v_1*a_2"]),
        degeneracy: Some("a_1*v_2 - v_1*a_2".into()),
        field_symbol: "Y".into(),
        initial_conditions: vec![vec![0.3, 1.2, 0.4], vec![-0.5, 0.8, 1.1]],
        errata: vec![
            erratum(
                "first prolonged form",
                "sum_i dv_(i)^da_(i)/v_(i)",
                "sum_i dv_(i)^da_(i)/v_(i)^3, the prolongation of dv^da/v^3",
            ),
            erratum(
                "bracket table of the prolonged Hamiltonian functions",
                "{h1,h2} = h1, {h1,h3} = 2 h2, {h2,h3} = h3",
                "{h1,h2} = -h1, {h1,h3} = -2 h2, {h2,h3} = -h3, as on the base chart",
            ),
        ],
    }
}

fn pair_sum(pairs: &[(usize, usize)], f: impl Fn(&str, &str) -> String) -> String {
    pairs
        .iter()
        .map(|&(i, j)| f(&format!("x{}", i + 1), &format!("x{}", j + 1)))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn pair_form(pairs: &[(usize, usize)]) -> Vec<EntryJson> {
    pairs
        .iter()
        .map(|&(i, j)| entry(i, j, format!("1/(x{} - x{})^2", i + 1, j + 1)))
        .collect()
}

/// Hamiltonians of `sum d/dx`, `sum x d/dx`, `sum x^2 d/dx` for a pair form.
fn pair_hamiltonians(pairs: &[(usize, usize)]) -> [String; 3] {
    [
        pair_sum(pairs, |p, q| format!("1/({p} - {q})")),
        format!("1/2*({})", pair_sum(pairs, |p, q| format!("({p} + {q})/({p} - {q})"))),
        pair_sum(pairs, |p, q| format!("{p}*{q}/({p} - {q})")),
    ]
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn coords(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn pair_exclusions(pairs: &[(usize, usize)]) -> Vec<String> {
    pairs.iter().map(|&(i, j)| format!("x{} - x{}", i + 1, j + 1)).collect()
}

fn sum_field(n: usize, f: impl Fn(&str) -> String) -> Vec<String> {
    coords(n).iter().map(|x| f(x)).collect()
}

const CROSS_RATIO: &str = "(x1 - x3)*(x2 - x4)/((x1 - x4)*(x2 - x3))";

fn riccati4() -> RecordJson {
    let names = coords(4);
    let p1 = [(0, 1), (2, 3)];
    let p2 = all_pairs(4);
    let h1 = pair_hamiltonians(&p1);
    let h2 = pair_hamiltonians(&p2);
    RecordJson {
        id: "riccati4".into(),
        title: "four copies of a Riccati equation".into(),
        domain: DomainJson {
            intervals: names.iter().map(|n| interval(n, -3.0, 3.0)).collect(),
            exclusions: pair_exclusions(&p2),
            margin: None,
        },
        chart: names,
        fields: vec![
            sum_field(4, |_| "1".into()),
            sum_field(4, |x| x.into()),
            sum_field(4, |x| format!("{x}^2")),
        ],
        forms: vec![pair_form(&p1), pair_form(&p2)],
        hamiltonians: (0..3).map(|a| vec![h1[a].clone(), h2[a].clone()]).collect(),
        kernels: vec![vec![], vec![]],
        constants: vec![
            bracket(0, 1, &[("1", 0)]),
            bracket(0, 2, &[("2", 1)]),
            bracket(1, 2, &[("1", 2)]),
        ],
        bracket_table: sl2_table(),
        parameters: vec![param("a", "sin(t)"), param("b", "cos(t)"), param("c", "1")],
        system: vec![term("a", 0), term("b", 1), term("c", 2)],
        invariants: vec![InvariantJson {
            label: "cross_ratio".into(),
            expr: CROSS_RATIO.into(),
            copies: 1,
        }],
        cross_exclusions: vec![],
        degeneracy: None,
        field_symbol: "X".into(),
        initial_conditions: vec![vec![-3.0, -2.0, -1.0, -0.5]],
        errata: vec![erratum(
            "Hamiltonian functions of the second form in the bracket table",
            "sums over i <= j",
            "sums over i < j; the diagonal terms are undefined",
        )],
    }
}

fn coordinate_field(n: usize, i: usize) -> Vec<String> {
    (0..n).map(|l| if l == i { "1" } else { "0" }.to_string()).collect()
}

fn control1() -> RecordJson {
    let names = coords(5);
    RecordJson {
        id: "control1".into(),
        title: "first control system on R^5".into(),
        domain: DomainJson {
            intervals: names.iter().map(|n| interval(n, -2.0, 2.0)).collect(),
            exclusions: vec![],
            margin: None,
        },
        chart: names,
        fields: rows(&[
            &["1", "0", "0", "0", "0"],
            &["0", "1", "x1", "x1^2", "2*x1*x2"],
            &["0", "0", "1", "2*x1", "2*x2"],
            &["0", "0", "0", "1", "0"],
            &["0", "0", "0", "0", "1"],
        ]),
        forms: vec![
            vec![entry(0, 1, "1")],
            vec![entry(0, 2, "1")],
            vec![entry(0, 3, "1")],
            vec![entry(1, 4, "1"), entry(0, 1, "x2^2")],
        ],
        hamiltonians: rows(&[
            &["x2", "x3", "x4", "x2^3/3"],
            &["-x1", "-x1^2/2", "-x1^3/3", "x5 - x1*x2^2"],
            &["0", "-x1", "-x1^2", "-x2^2"],
            &["0", "0", "-x1", "0"],
            &["0", "0", "0", "-x2"],
        ]),
        kernels: vec![
            vec![coordinate_field(5, 2), coordinate_field(5, 3), coordinate_field(5, 4)],
            vec![coordinate_field(5, 1), coordinate_field(5, 3), coordinate_field(5, 4)],
            vec![coordinate_field(5, 1), coordinate_field(5, 2), coordinate_field(5, 4)],
            vec![
                coordinate_field(5, 2),
                coordinate_field(5, 3),
                strs(&["1", "0", "0", "0", "x2^2"]),
            ],
        ],
        constants: vec![
            bracket(0, 1, &[("1", 2)]),
            bracket(0, 2, &[("2", 3)]),
            bracket(1, 2, &[("2", 4)]),
        ],
        bracket_table: vec![],
        parameters: vec![param("b1", "sin(t)"), param("b2", "cos(t)")],
        system: vec![term("b1", 0), term("b2", 1)],
        invariants: vec![],
        cross_exclusions: vec![],
        degeneracy: None,
        field_symbol: "X".into(),
        initial_conditions: vec![],
        errata: vec![erratum(
            "contraction of X3 with the second form",
            "dx1",
            "-dx1, so the Hamiltonian function is -x1",
        )],
    }
}

fn control2() -> RecordJson {
    let names = coords(5);
    RecordJson {
        id: "control2".into(),
        title: "second control system on R^5".into(),
        domain: DomainJson {
            intervals: names.iter().map(|n| interval(n, -2.0, 2.0)).collect(),
            exclusions: vec![],
            margin: None,
        },
        chart: names,
        fields: rows(&[
            &["1", "0", "-x2", "0", "x2^2"],
            &["0", "1", "x1", "x1^2", "0"],
            &["0", "0", "1", "x1", "-x2"],
            &["0", "0", "0", "1", "0"],
            &["0", "0", "0", "0", "1"],
        ]),
        forms: vec![
            vec![entry(0, 1, "1")],
            vec![entry(1, 4, "1")],
            vec![entry(0, 3, "1")],
            vec![entry(0, 2, "1"), entry(0, 1, "x1")],
        ],
        hamiltonians: rows(&[
            &["x2", "-x2^3/3", "x4", "x1*x2 + x3"],
            &["-x1", "x5", "-x1^3/3", "-x1^2"],
            &["0", "x2^2/2", "-x1^2/2", "-x1"],
            &["0", "0", "-x1", "0"],
            &["0", "-x2", "0", "0"],
        ]),
        kernels: vec![
            vec![coordinate_field(5, 2), coordinate_field(5, 3), coordinate_field(5, 4)],
            vec![coordinate_field(5, 0), coordinate_field(5, 2), coordinate_field(5, 3)],
            vec![coordinate_field(5, 1), coordinate_field(5, 2), coordinate_field(5, 4)],
            vec![
                coordinate_field(5, 3),
                coordinate_field(5, 4),
                strs(&["0", "1", "-x1", "0", "0"]),
            ],
        ],
        constants: vec![
            bracket(0, 1, &[("2", 2)]),
            bracket(0, 2, &[("1", 3)]),
            bracket(1, 2, &[("-1", 4)]),
        ],
        bracket_table: vec![],
        parameters: vec![param("b1", "sin(t)"), param("b2", "cos(t)")],
        system: vec![term("b1", 0), term("b2", 1)],
        invariants: vec![],
        cross_exclusions: vec![],
        degeneracy: None,
        field_symbol: "X".into(),
        initial_conditions: vec![],
        errata: vec![],
    }
}

fn diffusion_rs() -> RecordJson {
    RecordJson {
        id: "diffusion-rs".into(),
        title: "reduced system of a diffusion equation".into(),
        chart: strs(&["u", "v", "w"]),
        domain: DomainJson {
            intervals: box_of(&["u", "v", "w"], -2.0, 2.0),
            exclusions: strs(&["v"]),
            margin: None,
        },
        fields: rows(&[&["4*u^2", "4*u*v", "v^2"], &["1", "0", "0"], &["2*u", "v", "0"]]),
        forms: vec![
            vec![entry(0, 2, "-4*w/v^2"), entry(1, 2, "1/v"), entry(0, 1, "4*w^2/v^3")],
            vec![entry(0, 2, "-4/v^2"), entry(0, 1, "8*w/v^3")],
        ],
        hamiltonians: rows(&[
            &["4*u*w - 8*u^2*w^2/v^2 - v^2/2", "4*u - 16*u^2*w/v^2"],
            &["-2*w^2/v^2", "-4*w/v^2"],
            &["w - 4*u*w^2/v^2", "-8*u*w/v^2"],
        ]),
        kernels: vec![vec![strs(&["v^2", "4*w*v", "4*w^2"])], vec![strs(&["0", "v", "2*w"])]],
        constants: vec![
            bracket(0, 1, &[("-4", 2)]),
            bracket(0, 2, &[("-2", 0)]),
            bracket(1, 2, &[("2", 1)]),
        ],
        bracket_table: vec![],
        parameters: vec![param("a", "sin(t)/4"), param("b", "cos(t)"), param("c", "1")],
        system: vec![term("a", 0), term("-b", 1), term("c", 2)],
        invariants: vec![],
        cross_exclusions: vec![],
        degeneracy: None,
        field_symbol: "X".into(),
        initial_conditions: vec![],
        errata: vec![],
    }
}

fn lotka_volterra() -> RecordJson {
    let names = coords(5);
    let pairs: [[(usize, usize); 2]; 4] = [[(0, 1), (2, 3)], [(0, 1), (2, 4)], [(0, 1), (3, 4)], [(0, 2), (3, 4)]];
    let used: Vec<(usize, usize)> = {
        let mut v: Vec<_> = pairs.iter().flatten().copied().collect();
        v.sort();
        v.dedup();
        v
    };
    let hs: Vec<[String; 3]> = pairs.iter().map(|p| pair_hamiltonians(p)).collect();
    RecordJson {
        id: "lotka-volterra".into(),
        title: "Lie-Lotka-Volterra system on R^5".into(),
        domain: DomainJson {
            intervals: names.iter().map(|n| interval(n, 0.1, 3.0)).collect(),
            exclusions: pair_exclusions(&used),
            margin: None,
        },
        chart: names,
        fields: vec![sum_field(5, |x| x.into()), sum_field(5, |x| format!("{x}^2"))],
        forms: pairs.iter().map(|p| pair_form(p)).collect(),
        hamiltonians: (1..3).map(|a| hs.iter().map(|h| h[a].clone()).collect()).collect(),
        kernels: [4, 3, 2, 1].iter().map(|&i| vec![coordinate_field(5, i)]).collect(),
        constants: vec![bracket(0, 1, &[("1", 1)])],
        bracket_table: vec![],
        parameters: vec![param("a", "cos(t)"), param("b", "sin(t)")],
        system: vec![term("a", 0), term("b", 1)],
        invariants: vec![InvariantJson {
            label: "cross_ratio".into(),
            expr: CROSS_RATIO.into(),
            copies: 1,
        }],
        cross_exclusions: vec![],
        degeneracy: None,
        field_symbol: "X".into(),
        initial_conditions: vec![vec![0.2, 0.3, 0.15, 0.4, 0.25]],
        errata: vec![],
    }
}

/// Source data of a built-in example.
pub fn record_json(id: &str) -> Result<RecordJson> {
    Ok(match id {
        "schwarz3ks" => schwarz3ks(),
        "riccati4" => riccati4(),
        "control1" => control1(),
        "control2" => control2(),
        "diffusion-rs" => diffusion_rs(),
        "lotka-volterra" => lotka_volterra(),
        other => return Err(RegistryError::UnknownExample(other.to_string())),
    })
}

pub fn example(id: &str) -> Result<ExampleRecord> {
    ExampleRecord::from_json(record_json(id)?)
}

/// All built-in examples in registry order.
pub fn examples() -> Result<Vec<ExampleRecord>> {
    IDS.iter().map(|id| example(id)).collect()
}

/// The componentwise product of the Omega-Hamiltonian functions of `X3`
/// and `X2` of the diffusion example, which fails to be Omega-Hamiltonian.
pub fn product_not_hamiltonian_witness(zt: &mut ZeroTest) -> Result<ProductWitness> {
    let rec = example("diffusion-rs")?;
    let s = rec.structure(crate::ksymp::DEFAULT_SAMPLES, zt)?;
    let h = rec.omega_hamiltonian(2);
    let g = rec.omega_hamiltonian(1);
    Ok(product_witness(&s, &h, &g, &rec.fields[2], &rec.fields[1], zt)?)
}
