//! k-symplectic structures, Hamiltonian checks and the derived brackets.
//!
//! Convention: `{f, g} = X_g f`. With `i_{X_h} w = dh`, the Hamiltonian field
//! of `{h, g}` is `[X_g, X_h]`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::expr::{Expr, ExprError, Point, ZeroTest};
use crate::geom::{
    closedness_violation, exterior_derivative_0, interior_product, lie_bracket, Chart, DomainJson, EntryJson,
    GeomError, OneForm, TwoForm, TwoFormJson, VectorField,
};
use crate::linalg;

/// Joint nondegeneracy is sampled at this many points by default.
pub const DEFAULT_SAMPLES: usize = 100;
/// Relative singular value threshold for numeric rank.
pub const RANK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KsympError {
    #[error("form {form} is not closed: d of it fails on indices {triple:?}")]
    NotClosed { form: usize, triple: (usize, usize, usize) },
    #[error("forms have a common kernel at {0}")]
    DegenerateAt(String),
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("expected {expected} components, got {got}")]
    ComponentCountMismatch { expected: usize, got: usize },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("a structure needs at least one form")]
    NoForms,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("covector entries must be finite")]
    NonFiniteCovector,
    #[error(transparent)]
    Geom(GeomError),
}

impl From<GeomError> for KsympError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::ChartMismatch => KsympError::ChartMismatch,
            other => KsympError::Geom(other),
        }
    }
}

impl From<ExprError> for KsympError {
    fn from(e: ExprError) -> Self {
        KsympError::Geom(GeomError::Expr(e))
    }
}

pub type Result<T, E = KsympError> = std::result::Result<T, E>;

pub(crate) fn format_point(p: &Point) -> String {
    let body: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
    format!("({})", body.join(", "))
}

/// What validation found, whether or not the structure is valid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub k: usize,
    pub dim: usize,
    /// Per form: the first index triple where `d omega` is nonzero.
    pub closedness: Vec<Option<(usize, usize, usize)>>,
    pub samples: usize,
    /// Smallest stacked rank seen over the samples.
    pub min_rank: usize,
    /// Smallest ratio of the last to the first singular value seen.
    pub min_singular_ratio: f64,
    pub degenerate_at: Option<String>,
    /// Set when `dim` is not of the form `n (k + 1)`.
    pub dimension_warning: Option<String>,
}

impl ValidationReport {
    pub fn all_closed(&self) -> bool {
        self.closedness.iter().all(Option::is_none)
    }

    pub fn is_valid(&self) -> bool {
        self.all_closed() && self.degenerate_at.is_none()
    }
}

/// Closed two-forms on one chart with trivial joint kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KSymplecticStructure {
    chart: Arc<Chart>,
    forms: Vec<TwoForm>,
    report: ValidationReport,
}

impl KSymplecticStructure {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn k(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[TwoForm] {
        &self.forms
    }

    pub fn form(&self, i: usize) -> &TwoForm {
        &self.forms[i]
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn to_json(&self) -> StructureJson {
        StructureJson {
            chart: self.chart.names().iter().map(|s| s.to_string()).collect(),
            forms: self.forms.iter().map(|w| w.to_json().entries).collect(),
            domain: self.chart.domain_json(),
        }
    }
}

/// `{"chart": [...], "forms": [[{"i", "j", "coeff"}, ...], ...], "domain": {...}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureJson {
    pub chart: Vec<String>,
    pub forms: Vec<Vec<EntryJson>>,
    pub domain: DomainJson,
}

impl StructureJson {
    /// Rebuilds the chart and forms; validation is left to the caller.
    pub fn to_forms(&self) -> Result<(Arc<Chart>, Vec<TwoForm>)> {
        let chart = Chart::new(&self.chart, self.domain.to_box()?)?;
        let forms = self
            .forms
            .iter()
            .map(|entries| {
                TwoForm::from_json(
                    &chart,
                    &TwoFormJson {
                        chart: self.chart.clone(),
                        entries: entries.clone(),
                    },
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((chart, forms))
    }
}

fn rank_of(m: &DMatrix<f64>) -> (usize, f64) {
    let sv = linalg::singular_values(m);
    let rank = linalg::numeric_rank(&sv, RANK_THRESHOLD);
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    (rank, ratio)
}

fn stacked_at(forms: &[TwoForm], p: &Point) -> Result<DMatrix<f64>> {
    let n = forms[0].chart().dim();
    let mut m = DMatrix::zeros(n * forms.len(), n);
    for (i, w) in forms.iter().enumerate() {
        let mi = w.matrix_at(p)?;
        m.view_mut((i * n, 0), (n, n)).copy_from(&mi);
    }
    Ok(m)
}

/// Runs every check and reports, without failing on invalid structures.
pub fn assess_structure(forms: &[TwoForm], samples: usize, zt: &mut ZeroTest) -> Result<ValidationReport> {
    let first = forms.first().ok_or(KsympError::NoForms)?;
    if samples == 0 {
        return Err(KsympError::NoSamples);
    }
    let chart = first.chart().clone();
    if forms.iter().any(|w| !w.chart().same_as(&chart)) {
        return Err(KsympError::ChartMismatch);
    }
    let closedness = forms
        .iter()
        .map(|w| closedness_violation(w, zt))
        .collect::<Result<Vec<_>, _>>()?;
    let n = chart.dim();
    let k = forms.len();
    let mut min_rank = n;
    let mut min_ratio = f64::INFINITY;
    let mut degenerate_at = None;
    for p in zt.sample_points(chart.domain(), samples)? {
        let (rank, ratio) = rank_of(&stacked_at(forms, &p)?);
        min_rank = min_rank.min(rank);
        min_ratio = min_ratio.min(ratio);
        if rank < n && degenerate_at.is_none() {
            degenerate_at = Some(format_point(&p));
        }
    }
    let dimension_warning = (n % (k + 1) != 0).then(|| format!("dimension {n} is not a multiple of k + 1 = {}", k + 1));
    Ok(ValidationReport {
        k,
        dim: n,
        closedness,
        samples,
        min_rank,
        min_singular_ratio: min_ratio,
        degenerate_at,
        dimension_warning,
    })
}

/// Closedness is checked symbolically, joint nondegeneracy at `samples`
/// random points of the chart domain.
pub fn validate_structure(forms: Vec<TwoForm>, samples: usize, zt: &mut ZeroTest) -> Result<KSymplecticStructure> {
    let report = assess_structure(&forms, samples, zt)?;
    if let Some((form, triple)) = report
        .closedness
        .iter()
        .enumerate()
        .find_map(|(i, v)| v.map(|t| (i, t)))
    {
        return Err(KsympError::NotClosed { form, triple });
    }
    if let Some(p) = &report.degenerate_at {
        return Err(KsympError::DegenerateAt(p.clone()));
    }
    Ok(KSymplecticStructure {
        chart: forms[0].chart().clone(),
        forms,
        report,
    })
}

/// `n - rank` of the coefficient matrix at `p`.
pub fn kernel_dimension_at(omega: &TwoForm, p: &Point) -> Result<usize> {
    let m = omega.matrix_at(p)?;
    let sv = linalg::singular_values(&m);
    Ok(omega.chart().dim() - linalg::numeric_rank(&sv, RANK_THRESHOLD))
}

/// `i_X omega - dh`.
pub fn hamiltonian_residual(x: &VectorField, omega: &TwoForm, h: &Expr) -> Result<OneForm> {
    let lhs = interior_product(x, omega)?;
    Ok(lhs.sub(&exterior_derivative_0(h, x.chart()))?)
}

/// Does `i_X omega = dh` hold?
pub fn check_hamiltonian(x: &VectorField, omega: &TwoForm, h: &Expr, zt: &mut ZeroTest) -> Result<bool> {
    Ok(hamiltonian_residual(x, omega, h)?.is_zero(zt)?)
}

/// An R^k-valued function with an optional known Hamiltonian field.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaHamiltonian {
    components: Vec<Expr>,
    field: Option<VectorField>,
}

impl OmegaHamiltonian {
    pub fn new(components: Vec<Expr>) -> Self {
        OmegaHamiltonian {
            components: components.iter().map(Expr::simplify).collect(),
            field: None,
        }
    }

    pub fn with_field(mut self, x: VectorField) -> Self {
        self.field = Some(x);
        self
    }

    pub fn zero(k: usize) -> Self {
        OmegaHamiltonian::new(vec![Expr::zero(); k])
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.components[i]
    }

    pub fn field(&self) -> Option<&VectorField> {
        self.field.as_ref()
    }

    /// `sum theta_i h_i`.
    pub fn contract(&self, theta: &Covector) -> Result<Expr> {
        check_k(theta.len(), self.k())?;
        let terms = theta
            .rationals()
            .into_iter()
            .zip(&self.components)
            .map(|(q, h)| Expr::constant(q) * h)
            .collect();
        Ok(Expr::sum(terms).simplify())
    }

    /// Componentwise difference; the cached field is dropped.
    pub fn sub(&self, other: &OmegaHamiltonian) -> Result<OmegaHamiltonian> {
        check_k(other.k(), self.k())?;
        Ok(OmegaHamiltonian::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scale(&self, c: &Expr) -> OmegaHamiltonian {
        OmegaHamiltonian::new(self.components.iter().map(|h| c * h).collect())
    }

    /// Every component passes the zero test on `chart`.
    pub fn is_zero(&self, chart: &Chart, zt: &mut ZeroTest) -> Result<bool> {
        for h in &self.components {
            if !zt.is_zero(h, chart.sampling_domain())? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn check_k(got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(KsympError::ComponentCountMismatch { expected, got })
    }
}

/// Index of the first form `i` with `i_X omega_i != dh_i`.
pub fn omega_hamiltonian_failure(
    x: &VectorField,
    s: &KSymplecticStructure,
    h: &OmegaHamiltonian,
    zt: &mut ZeroTest,
) -> Result<Option<usize>> {
    check_k(h.k(), s.k())?;
    if !x.chart().same_as(s.chart()) {
        return Err(KsympError::ChartMismatch);
    }
    for (i, (w, hi)) in s.forms.iter().zip(&h.components).enumerate() {
        if !check_hamiltonian(x, w, hi, zt)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

pub fn check_omega_hamiltonian(
    x: &VectorField,
    s: &KSymplecticStructure,
    h: &OmegaHamiltonian,
    zt: &mut ZeroTest,
) -> Result<bool> {
    Ok(omega_hamiltonian_failure(x, s, h, zt)?.is_none())
}

fn require_hamiltonian(
    x: &VectorField,
    s: &KSymplecticStructure,
    h: &OmegaHamiltonian,
    what: &str,
    zt: &mut ZeroTest,
) -> Result<()> {
    match omega_hamiltonian_failure(x, s, h, zt)? {
        None => Ok(()),
        Some(i) => Err(KsympError::PreconditionFailed(format!(
            "{what} is not Hamiltonian for component {} with respect to form {}",
            i + 1,
            i + 1
        ))),
    }
}

/// Given two Hamiltonian fields of `h`, checks that they coincide.
pub fn omega_hamiltonian_field_is_unique(
    s: &KSymplecticStructure,
    x: &VectorField,
    y: &VectorField,
    h: &OmegaHamiltonian,
    zt: &mut ZeroTest,
) -> Result<bool> {
    require_hamiltonian(x, s, h, "first field", zt)?;
    require_hamiltonian(y, s, h, "second field", zt)?;
    Ok(x.equals(y, zt)?)
}

/// `{h, g}` with components `X_g h_i`; the cached field is `[X_g, X_h]`.
pub fn bracket_omega(
    s: &KSymplecticStructure,
    h: &OmegaHamiltonian,
    g: &OmegaHamiltonian,
    x_h: &VectorField,
    x_g: &VectorField,
    zt: &mut ZeroTest,
) -> Result<OmegaHamiltonian> {
    require_hamiltonian(x_h, s, h, "X_h", zt)?;
    require_hamiltonian(x_g, s, g, "X_g", zt)?;
    let comps = h.components.iter().map(|hi| x_g.apply(hi)).collect();
    Ok(OmegaHamiltonian::new(comps).with_field(lie_bracket(x_g, x_h)?))
}

/// A linear functional on R^k.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector(Vec<f64>);

impl Covector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().all(|v| v.is_finite()) {
            Ok(Covector(entries))
        } else {
            Err(KsympError::NonFiniteCovector)
        }
    }

    /// The i-th dual basis vector of R^k.
    pub fn basis(k: usize, i: usize) -> Self {
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        Covector(v)
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn rationals(&self) -> Vec<BigRational> {
        self.0
            .iter()
            .map(|v| BigRational::from_float(*v).expect("finite by construction"))
            .collect()
    }
}

/// `Omega_theta = sum theta_i omega_i`.
pub fn contract_theta(s: &KSymplecticStructure, theta: &Covector) -> Result<TwoForm> {
    check_k(theta.len(), s.k())?;
    let mut acc = TwoForm::zero(s.chart());
    for (q, w) in theta.rationals().into_iter().zip(&s.forms) {
        acc = acc.add(&w.scale(&Expr::constant(q)))?;
    }
    Ok(acc)
}

/// `{f, g}_theta = X_g f`, where `x_g` is a Hamiltonian field of `g` for
/// `Omega_theta`. The caller is responsible for that relation.
pub fn bracket_theta(f: &Expr, x_g: &VectorField) -> Expr {
    x_g.apply(f)
}

/// The outcome of testing whether `h . g` (componentwise product) is
/// Omega-Hamiltonian.
#[derive(Debug, Clone)]
pub struct ProductWitness {
    pub product: OmegaHamiltonian,
    /// `g_i X_h + h_i X_g`, one per form.
    pub candidates: Vec<VectorField>,
    /// Whether some pair of candidates differs.
    pub differ: bool,
    /// A point where two candidates differ, with the pair and the difference.
    pub certificate: Option<(Point, (usize, usize), Vec<f64>)>,
    /// A point where the stacked system `omega_i Z = d(h_i g_i)` has no
    /// solution, with the least-squares residual norm.
    pub obstruction: Option<(Point, f64)>,
}

/// Checks the componentwise product of two Omega-Hamiltonian functions.
pub fn product_witness(
    s: &KSymplecticStructure,
    h: &OmegaHamiltonian,
    g: &OmegaHamiltonian,
    x_h: &VectorField,
    x_g: &VectorField,
    zt: &mut ZeroTest,
) -> Result<ProductWitness> {
    require_hamiltonian(x_h, s, h, "X_h", zt)?;
    require_hamiltonian(x_g, s, g, "X_g", zt)?;
    let chart = s.chart();
    let product = OmegaHamiltonian::new(h.components.iter().zip(&g.components).map(|(a, b)| a * b).collect());
    let candidates = (0..s.k())
        .map(|i| x_h.scale(&g.components[i]).add(&x_g.scale(&h.components[i])))
        .collect::<Result<Vec<_>, _>>()?;

    let mut certificate = None;
    'pairs: for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            let diff = candidates[i].sub(&candidates[j])?;
            for c in diff.components() {
                if let Some(p) = zt.witness_nonzero(c, chart.sampling_domain())? {
                    let values = diff.evaluate(&p)?;
                    certificate = Some((p, (i, j), values));
                    break 'pairs;
                }
            }
        }
    }

    let mut obstruction = None;
    let n = chart.dim();
    let grads: Vec<OneForm> = product
        .components
        .iter()
        .map(|f| exterior_derivative_0(f, chart))
        .collect();
    for p in zt.sample_points(chart.domain(), zt.trials())? {
        let a = stacked_at(&s.forms, &p)?;
        let mut b = nalgebra::DVector::zeros(n * s.k());
        for (i, df) in grads.iter().enumerate() {
            for m in 0..n {
                // i_Z omega = df reads sum_l Z^l w_lm = df_m, i.e. w^T Z = df
                b[i * n + m] = -df.coefficient(m).evaluate(&p)?;
            }
        }
        let residual = linalg::least_squares_residual(&a, &b);
        let scale = 1.0 + b.norm();
        if residual > 1e-8 * scale {
            obstruction = Some((p, residual));
            break;
        }
    }

    Ok(ProductWitness {
        product,
        differ: certificate.is_some(),
        candidates,
        certificate,
        obstruction,
    })
}
