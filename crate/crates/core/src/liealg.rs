//! Structure constants, Lie closure of generators, and stability of
//! distributions under a Lie algebra of fields.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::expr::{Expr, ExprError, Point, ZeroTest};
use crate::geom::{lie_bracket, Chart, FieldJson, GeomError, VectorField};
use crate::ksymp::format_point;
use crate::linalg;

pub const DEFAULT_MAX_DIM: usize = 16;
/// First rounding bound for recovered constants, then the retry bound.
pub const DENOMINATOR_BOUNDS: [i64; 2] = [12, 48];
/// Minimum number of points used by the stability check.
pub const STABILITY_POINTS: usize = 50;
pub const STABILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LieError {
    #[error("empty basis")]
    EmptyBasis,
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("[X{}, X{}] is not a rational combination of the basis", .0 + 1, .1 + 1)]
    NotClosed(usize, usize),
    #[error("basis fields are not independent at the sampled points")]
    RankDeficientSamples,
    #[error("closure exceeds dimension {0}")]
    DimensionExceeded(usize),
    #[error("distribution rank drops at {0}")]
    RankDrop(String),
    #[error("recovered constants violate the Jacobi identity")]
    JacobiViolated,
    #[error(transparent)]
    Geom(GeomError),
}

impl From<GeomError> for LieError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::ChartMismatch => LieError::ChartMismatch,
            other => LieError::Geom(other),
        }
    }
}

impl From<ExprError> for LieError {
    fn from(e: ExprError) -> Self {
        LieError::Geom(GeomError::Expr(e))
    }
}

pub type Result<T, E = LieError> = std::result::Result<T, E>;

/// Certification record for one bracket `[X_a, X_b]`, `a < b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCertificate {
    pub alpha: usize,
    pub beta: usize,
    /// Denominator bound that produced certified constants.
    pub denominator_bound: i64,
    /// Least-squares residual norm before rounding.
    pub residual: f64,
}

/// A finite-dimensional Lie algebra of fields with exact constants
/// `[X_a, X_b] = sum_g c[a][b][g] X_g`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraModel {
    basis: Vec<VectorField>,
    constants: Vec<Vec<Vec<BigRational>>>,
    certificates: Vec<PairCertificate>,
}

impl LieAlgebraModel {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[VectorField] {
        &self.basis
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.basis[0].chart()
    }

    /// `c^g_{ab}`.
    pub fn constant(&self, a: usize, b: usize, g: usize) -> &BigRational {
        &self.constants[a][b][g]
    }

    /// All `c^g_{ab}` for fixed `(a, b)`.
    pub fn bracket_coefficients(&self, a: usize, b: usize) -> &[BigRational] {
        &self.constants[a][b]
    }

    pub fn certificates(&self) -> &[PairCertificate] {
        &self.certificates
    }

    /// Exact check of the Jacobi identity on the constants.
    pub fn jacobi_holds(&self) -> bool {
        jacobi_holds(&self.constants)
    }

    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            basis: self.basis.iter().map(VectorField::to_json).collect(),
            constants: self
                .constants
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|cs| cs.iter().map(ToString::to_string).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub basis: Vec<FieldJson>,
    /// `constants[a][b][g]` as rational strings.
    pub constants: Vec<Vec<Vec<String>>>,
}

#[allow(clippy::needless_range_loop)]
fn jacobi_holds(c: &[Vec<Vec<BigRational>>]) -> bool {
    let r = c.len();
    for a in 0..r {
        for b in 0..r {
            for d in 0..r {
                for mu in 0..r {
                    let mut s = BigRational::zero();
                    for g in 0..r {
                        s += &c[a][b][g] * &c[g][d][mu];
                        s += &c[b][d][g] * &c[g][a][mu];
                        s += &c[d][a][g] * &c[g][b][mu];
                    }
                    if !s.is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Nearest rational with denominator at most `max_den`; ties go to the
/// smaller denominator.
pub fn round_rational(x: f64, max_den: i64) -> BigRational {
    let mut best = (f64::INFINITY, 0i64, 1i64);
    for d in 1..=max_den {
        let n = (x * d as f64).round();
        let err = (x - n / d as f64).abs();
        if err < best.0 - 1e-15 {
            best = (err, n as i64, d);
        }
    }
    BigRational::new(BigInt::from(best.1), BigInt::from(best.2))
}

fn check_chart(fields: &[VectorField]) -> Result<Arc<Chart>> {
    let chart = fields.first().ok_or(LieError::EmptyBasis)?.chart().clone();
    if fields.iter().any(|f| !f.chart().same_as(&chart)) {
        return Err(LieError::ChartMismatch);
    }
    Ok(chart)
}

/// Fields evaluated at points, stacked into one column per field.
fn sample_matrix(fields: &[VectorField], points: &[Point]) -> Result<DMatrix<f64>> {
    let n = fields.first().map_or(0, |f| f.chart().dim());
    let mut m = DMatrix::zeros(n * points.len(), fields.len());
    for (j, f) in fields.iter().enumerate() {
        for (k, p) in points.iter().enumerate() {
            for (l, v) in f.evaluate(p)?.into_iter().enumerate() {
                m[(k * n + l, j)] = v;
            }
        }
    }
    Ok(m)
}

fn sample_vector(field: &VectorField, points: &[Point]) -> Result<DVector<f64>> {
    let m = sample_matrix(std::slice::from_ref(field), points)?;
    Ok(m.column(0).into_owned())
}

fn combination(basis: &[VectorField], coeffs: &[BigRational]) -> Result<VectorField> {
    let mut acc = VectorField::zero(basis[0].chart());
    for (x, c) in basis.iter().zip(coeffs) {
        if !c.is_zero() {
            acc = acc.add(&x.scale(&Expr::constant(c.clone())))?;
        }
    }
    Ok(acc)
}

/// Tries the denominator bounds in order and returns the first rounding
/// whose residual field passes the zero test.
fn certify(
    target: &VectorField,
    basis: &[VectorField],
    approx: &[f64],
    zt: &mut ZeroTest,
) -> Result<Option<(Vec<BigRational>, i64)>> {
    for bound in DENOMINATOR_BOUNDS {
        let coeffs: Vec<BigRational> = approx.iter().map(|c| round_rational(*c, bound)).collect();
        if target.sub(&combination(basis, &coeffs)?)?.is_zero(zt)? {
            return Ok(Some((coeffs, bound)));
        }
    }
    Ok(None)
}

/// Recovers exact structure constants of `basis` by sampling, least squares,
/// rounding and symbolic certification.
pub fn structure_constants(basis: &[VectorField], zt: &mut ZeroTest) -> Result<LieAlgebraModel> {
    let chart = check_chart(basis)?;
    let r = basis.len();
    let points = zt.sample_points(chart.sampling_domain(), r + 3)?;
    let a = sample_matrix(basis, &points)?;
    if linalg::numeric_rank(&linalg::singular_values(&a), 1e-10) < r {
        return Err(LieError::RankDeficientSamples);
    }
    let mut constants = vec![vec![vec![BigRational::zero(); r]; r]; r];
    let mut certificates = Vec::new();
    for al in 0..r {
        for be in al + 1..r {
            let br = lie_bracket(&basis[al], &basis[be])?;
            let b = sample_vector(&br, &points)?;
            let x = linalg::least_squares(&a, &b);
            let residual = (&a * &x - &b).norm();
            let approx: Vec<f64> = x.iter().copied().collect();
            let (coeffs, bound) = certify(&br, basis, &approx, zt)?.ok_or(LieError::NotClosed(al, be))?;
            for (g, c) in coeffs.into_iter().enumerate() {
                constants[be][al][g] = -c.clone();
                constants[al][be][g] = c;
            }
            certificates.push(PairCertificate {
                alpha: al,
                beta: be,
                denominator_bound: bound,
                residual,
            });
        }
    }
    if !jacobi_holds(&constants) {
        return Err(LieError::JacobiViolated);
    }
    Ok(LieAlgebraModel {
        basis: basis.to_vec(),
        constants,
        certificates,
    })
}

/// Is `target` a constant combination of `basis`? Numeric test at `points`,
/// confirmed symbolically when a dependence is claimed.
fn in_constant_span(target: &VectorField, basis: &[VectorField], points: &[Point], zt: &mut ZeroTest) -> Result<bool> {
    let b = sample_vector(target, points)?;
    if b.norm() == 0.0 && target.is_zero(zt)? {
        return Ok(true);
    }
    if basis.is_empty() {
        return Ok(false);
    }
    let a = sample_matrix(basis, points)?;
    let x = linalg::least_squares(&a, &b);
    let residual = (&a * &x - &b).norm();
    if residual > 1e-8 * (1.0 + b.norm()) {
        return Ok(false);
    }
    let approx: Vec<f64> = x.iter().copied().collect();
    if certify(target, basis, &approx, zt)?.is_some() {
        return Ok(true);
    }
    // irrational-looking constants: confirm with the exact binary values
    let exact: Vec<BigRational> = approx
        .iter()
        .map(|c| BigRational::from_float(*c).unwrap_or_else(BigRational::zero))
        .collect();
    Ok(target.sub(&combination(basis, &exact)?)?.is_zero(zt)?)
}

/// Brackets generators until the span closes, then recovers constants.
pub fn lie_closure(generators: &[VectorField], max_dim: usize, zt: &mut ZeroTest) -> Result<LieAlgebraModel> {
    let chart = check_chart(generators)?;
    let points = zt.sample_points(chart.sampling_domain(), max_dim + 3)?;
    let mut basis: Vec<VectorField> = Vec::new();
    for g in generators {
        if !in_constant_span(g, &basis, &points, zt)? {
            basis.push(g.clone());
        }
    }
    if basis.len() > max_dim {
        return Err(LieError::DimensionExceeded(max_dim));
    }
    let mut done = 0;
    while done < basis.len() {
        // bracket the next element against every earlier one
        let j = done;
        for i in 0..j {
            let br = lie_bracket(&basis[i], &basis[j])?;
            if !in_constant_span(&br, &basis, &points, zt)? {
                basis.push(br);
                if basis.len() > max_dim {
                    return Err(LieError::DimensionExceeded(max_dim));
                }
            }
        }
        done += 1;
    }
    structure_constants(&basis, zt)
}

/// Outcome of a stability check of a distribution under a family of fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// True when membership was decided by vanishing minors, symbolically.
    pub certified: bool,
    pub rank: usize,
    /// `(x, y)` index pairs whose bracket leaves the distribution.
    pub failures: Vec<(usize, usize)>,
}

fn minors_vanish(cols: &[&VectorField], zt: &mut ZeroTest) -> Result<bool> {
    let n = cols[0].chart().dim();
    let size = cols.len();
    let dom = cols[0].chart().sampling_domain().clone();
    for rows in combinations(n, size) {
        let m: Vec<Vec<Expr>> = rows
            .iter()
            .map(|&r| cols.iter().map(|c| c.component(r).clone()).collect())
            .collect();
        if !zt.is_zero(&determinant(&m), &dom)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn determinant(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        n => {
            let mut terms = Vec::with_capacity(n);
            for (j, head) in m[0].iter().enumerate() {
                if head.is_const_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, e)| e.clone())
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                terms.push(Expr::int(sign) * head * determinant(&minor));
            }
            Expr::sum(terms).simplify()
        }
    }
}

/// Largest distribution rank for which membership is certified via minors.
const MAX_CERTIFIED_RANK: usize = 3;

/// Checks `[X, Y]` in `span D` for every `X` in `v` and `Y` in `d`.
pub fn assess_stability(v: &[VectorField], d: &[VectorField], zt: &mut ZeroTest) -> Result<StabilityReport> {
    if d.is_empty() || v.is_empty() {
        return Ok(StabilityReport {
            stable: true,
            certified: true,
            rank: 0,
            failures: Vec::new(),
        });
    }
    let mut all = v.to_vec();
    all.extend_from_slice(d);
    let chart = check_chart(&all)?;
    let n = chart.dim();
    let points = zt.sample_points(chart.sampling_domain(), STABILITY_POINTS.max(d.len() + 3))?;
    let mut rank = None;
    let mut mats = Vec::with_capacity(points.len());
    for p in &points {
        let mut m = DMatrix::zeros(n, d.len());
        for (j, y) in d.iter().enumerate() {
            for (l, val) in y.evaluate(p)?.into_iter().enumerate() {
                m[(l, j)] = val;
            }
        }
        let rk = linalg::numeric_rank(&linalg::singular_values(&m), STABILITY_TOL);
        match rank {
            None => rank = Some(rk),
            Some(r0) if r0 != rk => return Err(LieError::RankDrop(format_point(p))),
            _ => {}
        }
        mats.push(m);
    }
    let rank = rank.unwrap_or(0);
    let independent = rank == d.len();
    let certified = independent && rank <= MAX_CERTIFIED_RANK;
    let mut failures = Vec::new();
    for (i, x) in v.iter().enumerate() {
        for (j, y) in d.iter().enumerate() {
            let br = lie_bracket(x, y)?;
            let inside = if certified {
                let mut cols: Vec<&VectorField> = d.iter().collect();
                cols.push(&br);
                minors_vanish(&cols, zt)?
            } else {
                let mut ok = true;
                for (p, m) in points.iter().zip(&mats) {
                    let b = DVector::from_vec(br.evaluate(p)?);
                    let res = linalg::least_squares_residual(m, &b);
                    if res > STABILITY_TOL * (1.0 + b.norm()) {
                        ok = false;
                        break;
                    }
                }
                ok
            };
            if !inside {
                failures.push((i, j));
            }
        }
    }
    Ok(StabilityReport {
        stable: failures.is_empty(),
        certified,
        rank,
        failures,
    })
}

pub fn is_stable_distribution(v: &[VectorField], d: &[VectorField], zt: &mut ZeroTest) -> Result<bool> {
    Ok(assess_stability(v, d, zt)?.stable)
}

/// Helper for tests and reports: `c` as a signed decimal-free string.
pub fn format_rational(c: &BigRational) -> String {
    if c.denom() == &BigInt::from(1) {
        c.numer().to_string()
    } else if c.is_negative() {
        format!("-{}/{}", -c.numer(), c.denom())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}
