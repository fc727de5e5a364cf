//! Time-dependent systems, RK4 trajectories and constants of motion.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::expr::eval::NON_FINITE;
use crate::expr::{Expr, ExprError, Parser, Point, Program, Symbol, ZeroTest, TIME};
use crate::geom::{Chart, GeomError, TwoForm, VectorField};
use crate::ksymp::{bracket_theta, check_hamiltonian, KsympError};
use crate::prolong::{prolong_field, ProductChart, ProlongError};

/// Samples where `|degeneracy| < DEGENERACY_TOL` are flagged, not evaluated.
pub const DEGENERACY_TOL: f64 = 1e-10;
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MotionError {
    #[error("a time-dependent field needs at least one basis field")]
    EmptyBasis,
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("coefficient `{0}` depends on more than t")]
    NotTimeOnly(String),
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("interval [{t0}, {t1}] runs backwards")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("expected a point with {expected} coordinates, got {got}")]
    PointShape { expected: usize, got: usize },
    #[error("trajectory left the domain at t = {t}; last valid state {point:?}")]
    LeftDomain { t: f64, point: Vec<f64> },
    #[error("state became non-finite at t = {t}; last valid state {point:?}")]
    NonFiniteState { t: f64, point: Vec<f64> },
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    #[error("time grids differ: {0}")]
    GridMismatch(String),
    #[error("bracket table fails: {0}")]
    BracketTableMismatch(String),
    #[error("candidate does not commute with h{0}")]
    NotCasimir(usize),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Prolong(#[from] ProlongError),
    #[error(transparent)]
    Ksymp(#[from] KsympError),
}

impl From<ExprError> for MotionError {
    fn from(e: ExprError) -> Self {
        MotionError::Geom(GeomError::Expr(e))
    }
}

pub type Result<T> = std::result::Result<T, MotionError>;

fn slots(chart: &Chart) -> Vec<Symbol> {
    let mut s = chart.symbols().to_vec();
    s.push(Symbol::new(TIME));
    s
}

/// `X = sum_a b_a(t) X_a`.
#[derive(Debug, Clone)]
pub struct TDependentField {
    chart: Arc<Chart>,
    basis: Vec<VectorField>,
    coeffs: Vec<Expr>,
    combined: VectorField,
    programs: Vec<Program>,
}

impl TDependentField {
    pub fn new(basis: Vec<VectorField>, coeffs: Vec<Expr>) -> Result<Self> {
        let first = basis.first().ok_or(MotionError::EmptyBasis)?;
        let chart = first.chart().clone();
        if basis.iter().any(|x| !x.chart().same_as(&chart)) {
            return Err(MotionError::ChartMismatch);
        }
        if coeffs.len() != basis.len() {
            return Err(MotionError::CoefficientCount {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        if let Some(b) = coeffs.iter().find(|b| b.free_symbols().iter().any(|s| !s.is_time())) {
            return Err(MotionError::NotTimeOnly(b.to_string()));
        }
        let mut combined = VectorField::zero(&chart);
        for (x, b) in basis.iter().zip(&coeffs) {
            combined = combined.add(&x.scale(b))?;
        }
        let slots = slots(&chart);
        let programs = combined
            .components()
            .iter()
            .map(|c| c.compile(&slots))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(TDependentField {
            chart,
            basis,
            coeffs,
            combined,
            programs,
        })
    }

    /// Coefficients given as strings in `t`.
    pub fn parse<S: AsRef<str>>(basis: Vec<VectorField>, coeffs: &[S]) -> Result<Self> {
        let p = Parser::new(&[] as &[&str]);
        let coeffs = coeffs
            .iter()
            .map(|s| p.parse(s.as_ref()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(basis, coeffs)
    }

    pub fn autonomous(x: VectorField) -> Self {
        Self::new(vec![x], vec![Expr::one()]).expect("one field with a constant coefficient")
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn basis(&self) -> &[VectorField] {
        &self.basis
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.coeffs
    }

    /// The symbolic field with `t` left free.
    pub fn field(&self) -> &VectorField {
        &self.combined
    }

    pub fn with_coefficients(&self, coeffs: Vec<Expr>) -> Result<Self> {
        Self::new(self.basis.clone(), coeffs)
    }

    /// The same coefficients on the prolonged basis.
    pub fn prolong(&self, pc: &ProductChart) -> Result<Self> {
        let basis = self
            .basis
            .iter()
            .map(|x| prolong_field(pc, x))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(basis, self.coeffs.clone())
    }

    fn rhs(&self, t: f64, x: &[f64], buf: &mut Vec<f64>, out: &mut [f64]) -> std::result::Result<(), ExprError> {
        buf.clear();
        buf.extend_from_slice(x);
        buf.push(t);
        for (o, p) in out.iter_mut().zip(&self.programs) {
            *o = p.eval(buf)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegratorMeta {
    pub method: &'static str,
    pub step: f64,
    pub t0: f64,
    pub t1: f64,
    pub system: Option<String>,
    pub seed: Option<u64>,
}

/// Accepted RK4 states, including the initial one.
#[derive(Debug, Clone)]
pub struct Trajectory {
    chart: Arc<Chart>,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    meta: IntegratorMeta,
}

impl Trajectory {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn meta(&self) -> &IntegratorMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        Some((*self.times.last()?, self.states.last()?.as_slice()))
    }

    pub fn labeled(mut self, system: impl Into<String>, seed: Option<u64>) -> Self {
        self.meta.system = Some(system.into());
        self.meta.seed = seed;
        self
    }

    /// Sample `i` as a named point, including `t`.
    pub fn point(&self, i: usize) -> Point {
        let mut p: Point = self
            .chart
            .symbols()
            .iter()
            .cloned()
            .zip(self.states[i].iter().copied())
            .collect();
        p.insert(Symbol::new(TIME), self.times[i]);
        p
    }

    /// `t,<coord>...` then one row per sample.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for name in self.chart.names() {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            write!(s, "{t}").unwrap();
            for v in x {
                write!(s, ",{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

/// Signs of the domain exclusions at `x`, or `None` if one of them vanishes
/// or is undefined there.
fn exclusion_signs(chart: &Chart, x: &[f64], t: f64) -> Option<Vec<bool>> {
    let mut p: Point = chart.symbols().iter().cloned().zip(x.iter().copied()).collect();
    p.insert(Symbol::new(TIME), t);
    chart
        .domain()
        .exclusions()
        .iter()
        .map(|e| match e.evaluate(&p) {
            Ok(v) if v != 0.0 => Some(v > 0.0),
            _ => None,
        })
        .collect()
}

/// Classic fixed-step RK4 from `t0` to `t1`. The last step is shortened to
/// land on `t1`. A zero-length interval gives an empty trajectory.
///
/// Only the exclusions of the chart domain are enforced along the way: each
/// must keep the sign it has at `x0`. The sampling intervals do not bound
/// trajectories.
pub fn integrate(f: &TDependentField, x0: &[f64], t0: f64, t1: f64, step: f64) -> Result<Trajectory> {
    let n = f.chart.dim();
    if !(step > 0.0 && step.is_finite()) {
        return Err(MotionError::InvalidStep(step));
    }
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(MotionError::InvalidInterval { t0, t1 });
    }
    if x0.len() != n {
        return Err(MotionError::PointShape {
            expected: n,
            got: x0.len(),
        });
    }
    let meta = IntegratorMeta {
        method: "rk4",
        step,
        t0,
        t1,
        system: None,
        seed: None,
    };
    let mut traj = Trajectory {
        chart: f.chart.clone(),
        times: Vec::new(),
        states: Vec::new(),
        meta,
    };
    if t1 == t0 {
        return Ok(traj);
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(MotionError::NonFiniteState {
            t: t0,
            point: x0.to_vec(),
        });
    }
    let Some(signs) = exclusion_signs(&f.chart, x0, t0) else {
        return Err(MotionError::LeftDomain {
            t: t0,
            point: x0.to_vec(),
        });
    };

    let steps = (((t1 - t0) / step) - 1e-9).ceil().max(1.0) as usize;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.times.push(t0);
    traj.states.push(x0.to_vec());

    let mut buf = Vec::with_capacity(n + 1);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut x = x0.to_vec();
    for i in 0..steps {
        let t = t0 + i as f64 * step;
        let t_next = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * step };
        let h = t_next - t;
        // overflow inside a stage is a blow-up, anything else is a domain exit
        let left = |e: ExprError| match e {
            ExprError::UndefinedAtPoint(why) if why == NON_FINITE => {
                MotionError::NonFiniteState { t, point: x.clone() }
            }
            _ => MotionError::LeftDomain { t, point: x.clone() },
        };

        f.rhs(t, &x, &mut buf, &mut k1).map_err(left)?;
        for j in 0..n {
            tmp[j] = x[j] + 0.5 * h * k1[j];
        }
        f.rhs(t + 0.5 * h, &tmp, &mut buf, &mut k2).map_err(left)?;
        for j in 0..n {
            tmp[j] = x[j] + 0.5 * h * k2[j];
        }
        f.rhs(t + 0.5 * h, &tmp, &mut buf, &mut k3).map_err(left)?;
        for j in 0..n {
            tmp[j] = x[j] + h * k3[j];
        }
        f.rhs(t_next, &tmp, &mut buf, &mut k4).map_err(left)?;
        for j in 0..n {
            tmp[j] = x[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if tmp.iter().any(|v| !v.is_finite()) {
            return Err(MotionError::NonFiniteState { t: t_next, point: x });
        }
        if exclusion_signs(&f.chart, &tmp, t_next).as_ref() != Some(&signs) {
            return Err(MotionError::LeftDomain { t: t_next, point: x });
        }
        x.copy_from_slice(&tmp);
        traj.times.push(t_next);
        traj.states.push(x.clone());
    }
    Ok(traj)
}

/// Integrates each initial condition on its own thread. Results come back in
/// input order.
pub fn integrate_many(f: &TDependentField, x0s: &[Vec<f64>], t0: f64, t1: f64, step: f64) -> Vec<Result<Trajectory>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = x0s
            .iter()
            .map(|x0| s.spawn(move || integrate(f, x0, t0, t1, step)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("integrator thread panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub label: String,
    pub initial: f64,
    pub max_abs: f64,
    /// `max_abs / max(1, |initial|)`.
    pub max_rel: f64,
    pub tol: f64,
    pub pass: bool,
}

fn drift(label: &str, values: &[f64], tol: f64) -> Result<DriftReport> {
    let &initial = values.first().ok_or(MotionError::EmptyTrajectory)?;
    let max_abs = values.iter().map(|v| (v - initial).abs()).fold(0.0, f64::max);
    let max_rel = max_abs / initial.abs().max(1.0);
    Ok(DriftReport {
        label: label.to_string(),
        initial,
        max_abs,
        max_rel,
        tol,
        pass: max_rel <= tol,
    })
}

/// Evaluates `f` along `traj` and measures how far it strays from its
/// initial value.
pub fn check_constant(label: &str, f: &Expr, traj: &Trajectory, tol: f64) -> Result<DriftReport> {
    let prog = f.compile(&slots(&traj.chart))?;
    let mut buf = Vec::with_capacity(traj.chart.dim() + 1);
    let mut values = Vec::with_capacity(traj.len());
    for (t, x) in traj.times.iter().zip(&traj.states) {
        buf.clear();
        buf.extend_from_slice(x);
        buf.push(*t);
        let v = prog.eval(&buf).map_err(|e| match e {
            ExprError::UndefinedAtPoint(why) => ExprError::UndefinedAtPoint(format!("{why} at t = {t}")),
            other => other,
        })?;
        values.push(v);
    }
    drift(label, &values, tol)
}

/// Coordinates of the two-copy chart the invariants below are written on.
pub const SCHWARZ_PAIR: [&str; 6] = ["x_1", "v_1", "a_1", "x_2", "v_2", "a_2"];

/// Vanishes where the invariants below are undefined.
pub fn schwarzian_degeneracy() -> Expr {
    crate::expr::parse("a_1*v_2 - v_1*a_2", &SCHWARZ_PAIR).expect("fixed source")
}

/// Source strings of [`schwarzian_invariants`], over [`SCHWARZ_PAIR`].
pub fn schwarzian_invariant_sources() -> Vec<(&'static str, String)> {
    const D: &str = "(a_1*v_2 - v_1*a_2)";
    let c1 = "(a_2*v_1 - a_1*v_2)^2/(v_1^3*v_2^3)".to_string();
    let f1 = format!("(x_1*x_2 - 2*v_1*v_2*(v_1*x_2 - v_2*x_1)/{D})");
    let f3 = format!("(x_1 + x_2 - 2*v_1*v_2*(v_1 - v_2)/{D})");
    let f4 = format!("(x_1 - x_2 - 2*v_1*v_2*(v_1 + v_2)/{D})");
    let c2 = format!("-4*(-x_1*x_2 + 2*v_1*v_2*(v_1*x_2 - v_2*x_1)/{D})*{c1} - 4^2");
    let f12 = format!("-2*(a_2*v_1 - v_2*a_1)^2/(v_1^3*v_2^3)*{f3}");
    vec![
        ("C_xi1", c1),
        ("C_xi2", c2),
        ("F_xi1xi2", f12),
        ("F1", f1),
        ("F3", f3),
        ("F4", f4),
    ]
}

/// The six constants of motion of the prolonged third-order Schwarzian
/// system, in their explicit rational forms, labeled.
pub fn schwarzian_invariants() -> Vec<(&'static str, Expr)> {
    let p = Parser::new(&SCHWARZ_PAIR);
    schwarzian_invariant_sources()
        .into_iter()
        .map(|(l, s)| (l, p.parse(&s).expect("fixed source")))
        .collect()
}

/// `h1 h3 - h2^2`, certified to commute with each `h_i` under the bracket of
/// `omega_theta`. `xs[i]` must be a Hamiltonian field of `hs[i]`, and the
/// triple must satisfy `{h1,h2} = -h1`, `{h1,h3} = -2 h2`, `{h2,h3} = -h3`.
pub fn casimir_constant(
    hs: [&Expr; 3],
    xs: [&VectorField; 3],
    omega_theta: &TwoForm,
    zt: &mut ZeroTest,
) -> Result<Expr> {
    let chart = omega_theta.chart();
    let dom = chart.sampling_domain();
    for (i, (h, x)) in hs.iter().zip(xs).enumerate() {
        if !check_hamiltonian(x, omega_theta, h, zt)? {
            return Err(MotionError::BracketTableMismatch(format!(
                "X{} is not a Hamiltonian field of h{}",
                i + 1,
                i + 1
            )));
        }
    }
    let table = [
        (0, 1, Expr::int(-1) * hs[0]),
        (0, 2, Expr::int(-2) * hs[1]),
        (1, 2, Expr::int(-1) * hs[2]),
    ];
    for (i, j, want) in table {
        let got = bracket_theta(hs[i], xs[j]);
        if !zt.is_zero(&(&got - &want), dom)? {
            return Err(MotionError::BracketTableMismatch(format!(
                "{{h{}, h{}}} = {}, expected {}",
                i + 1,
                j + 1,
                got,
                want.simplify()
            )));
        }
    }
    let c = (hs[0] * hs[2] - hs[1] * hs[1]).simplify();
    for (i, x) in xs.iter().enumerate() {
        if !zt.is_zero(&bracket_theta(&c, x), dom)? {
            return Err(MotionError::NotCasimir(i + 1));
        }
    }
    Ok(c)
}

/// Drift of every invariant over one tuple of solutions.
#[derive(Debug, Clone, Serialize)]
pub struct PairingReport {
    pub label: String,
    /// Samples skipped because the degeneracy expression was near zero.
    pub degenerate_samples: usize,
    pub drifts: Vec<DriftReport>,
}

impl PairingReport {
    pub fn degenerate(&self) -> bool {
        self.degenerate_samples > 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperpositionReport {
    pub pairings: Vec<PairingReport>,
}

impl SuperpositionReport {
    pub fn degenerate(&self) -> bool {
        self.pairings.iter().any(PairingReport::degenerate)
    }

    /// Every nondegenerate pairing conserves every invariant.
    pub fn pass(&self) -> bool {
        self.pairings
            .iter()
            .filter(|p| !p.degenerate())
            .all(|p| p.drifts.iter().all(|d| d.pass))
    }
}

/// Checks that `invariants` (on the product chart of `pc`) stay constant
/// when evaluated on the particular solutions themselves and on every tuple
/// obtained by swapping one particular solution for the probe.
pub fn superposition_check(
    invariants: &[(&str, Expr)],
    pc: &ProductChart,
    particulars: &Trajectory,
    probe: &Trajectory,
    tol: f64,
    degeneracy: Option<&Expr>,
) -> Result<SuperpositionReport> {
    if !particulars.chart.same_as(pc.chart()) || !probe.chart.same_as(pc.base()) {
        return Err(MotionError::ChartMismatch);
    }
    if particulars.len() != probe.len() {
        return Err(MotionError::GridMismatch(format!(
            "{} samples against {}",
            particulars.len(),
            probe.len()
        )));
    }
    if let Some((t, s)) = particulars
        .times
        .iter()
        .zip(&probe.times)
        .find(|(a, b)| (*a - *b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(MotionError::GridMismatch(format!("t = {t} against t = {s}")));
    }
    if particulars.is_empty() {
        return Err(MotionError::EmptyTrajectory);
    }
    let sl = slots(pc.chart());
    let progs = invariants
        .iter()
        .map(|(_, e)| e.compile(&sl))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let degen = degeneracy.map(|e| e.compile(&sl)).transpose()?;

    let n = pc.base().dim();
    let m = pc.copies();
    let mut pairings = Vec::with_capacity(m + 1);
    for swap in 0..=m {
        let label = match swap {
            0 => "particulars".to_string(),
            a => format!("probe as copy {a}"),
        };
        let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(probe.len()); progs.len()];
        let mut degenerate_samples = 0;
        let mut buf = Vec::with_capacity(n * m + 1);
        for (i, t) in probe.times.iter().enumerate() {
            buf.clear();
            buf.extend_from_slice(&particulars.states[i]);
            if swap > 0 {
                buf[(swap - 1) * n..swap * n].copy_from_slice(&probe.states[i]);
            }
            buf.push(*t);
            if let Some(d) = &degen {
                if d.eval(&buf).map_or(true, |v| v.abs() < DEGENERACY_TOL) {
                    degenerate_samples += 1;
                    continue;
                }
            }
            for (s, p) in series.iter_mut().zip(&progs) {
                s.push(p.eval(&buf)?);
            }
        }
        let drifts = if series.first().is_some_and(|s| s.is_empty()) {
            Vec::new()
        } else {
            invariants
                .iter()
                .zip(&series)
                .map(|((l, _), s)| drift(l, s, tol))
                .collect::<Result<Vec<_>>>()?
        };
        pairings.push(PairingReport {
            label,
            degenerate_samples,
            drifts,
        });
    }
    Ok(SuperpositionReport { pairings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::DomainBox;
    use crate::geom::lie_bracket;
    use crate::ksymp::contract_theta;

    fn o2() -> Arc<Chart> {
        let dom = DomainBox::builder()
            .interval("x", -2.0, 2.0)
            .interval("v", -2.0, 2.0)
            .interval("a", -2.0, 2.0)
            .exclude(Expr::var("v"))
            .build()
            .unwrap();
        Chart::new(&["x", "v", "a"], dom).unwrap()
    }

    fn ys(c: &Arc<Chart>) -> Vec<VectorField> {
        [["0", "0", "2*v"], ["0", "v", "2*a"], ["v", "a", "3/2*a^2/v"]]
            .iter()
            .map(|f| VectorField::parse(c, f).unwrap())
            .collect()
    }

    fn schwarz(c: &Arc<Chart>, b1: &str) -> TDependentField {
        let y = ys(c);
        TDependentField::parse(vec![y[2].clone(), y[0].clone()], &["1", b1]).unwrap()
    }

    fn pair() -> ProductChart {
        ProductChart::with_exclusions(&o2(), 2, &["v_1*a_2 - v_2*a_1"]).unwrap()
    }

    #[test]
    fn field_validation() {
        let c = o2();
        let y = ys(&c);
        assert_eq!(
            TDependentField::new(vec![], vec![]).unwrap_err(),
            MotionError::EmptyBasis
        );
        assert!(matches!(
            TDependentField::parse(vec![y[0].clone()], &["1", "2"]),
            Err(MotionError::CoefficientCount { .. })
        ));
        let xb = TDependentField::new(vec![y[0].clone()], vec![c.parse("x").unwrap()]);
        assert!(matches!(xb, Err(MotionError::NotTimeOnly(_))));
    }

    #[test]
    fn free_motion_is_exact() {
        let c = o2();
        let f = schwarz(&c, "0");
        let tr = integrate(&f, &[0.0, 1.0, 0.0], 0.0, 1.0, 1e-3).unwrap();
        assert_eq!(tr.len(), 1001);
        for (t, x) in tr.times().iter().zip(tr.states()) {
            assert!((x[0] - t).abs() < 1e-10);
            assert!((x[1] - 1.0).abs() < 1e-10 && x[2].abs() < 1e-10);
        }
        assert_eq!(tr.last().unwrap().0, 1.0);
    }

    #[test]
    fn zero_field_and_empty_interval() {
        let c = o2();
        let f = TDependentField::autonomous(VectorField::zero(&c));
        let tr = integrate(&f, &[0.3, 1.0, 2.0], 0.0, 0.5, 0.1).unwrap();
        assert_eq!(tr.len(), 6);
        assert!(tr.states().iter().all(|x| x == &[0.3, 1.0, 2.0]));
        assert!(integrate(&f, &[0.3, 1.0, 2.0], 1.0, 1.0, 0.1).unwrap().is_empty());
        assert!(matches!(
            integrate(&f, &[0.3, 1.0, 2.0], 1.0, 0.0, 0.1),
            Err(MotionError::InvalidInterval { .. })
        ));
        assert!(matches!(
            integrate(&f, &[0.3, 1.0, 2.0], 0.0, 1.0, 0.0),
            Err(MotionError::InvalidStep(_))
        ));
        assert!(matches!(
            integrate(&f, &[0.3, 1.0], 0.0, 1.0, 0.1),
            Err(MotionError::PointShape { .. })
        ));
        assert!(matches!(
            integrate(&f, &[0.3, 0.0, 2.0], 0.0, 1.0, 0.1),
            Err(MotionError::LeftDomain { .. })
        ));
    }

    #[test]
    fn shortened_last_step() {
        let c = o2();
        let f = TDependentField::autonomous(VectorField::coordinate(&c, 0));
        let tr = integrate(&f, &[0.0, 1.0, 0.0], 0.0, 0.25, 0.1).unwrap();
        assert_eq!(tr.times().len(), 4);
        assert!((tr.times()[3] - 0.25).abs() < 1e-15);
        assert!((tr.states()[3][0] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn riccati_closed_form() {
        let dom = DomainBox::builder().interval("x", -3.0, 3.0).build().unwrap();
        let c = Chart::new(&["x"], dom).unwrap();
        let basis = ["1", "x", "x^2"]
            .iter()
            .map(|s| VectorField::parse(&c, &[*s]).unwrap())
            .collect();
        let f = TDependentField::parse(basis, &["0", "0", "1"]).unwrap();
        let tr = integrate(&f, &[-1.0], 0.0, 1.0, 1e-3).unwrap();
        let (t, x) = tr.last().unwrap();
        assert!((x[0] + 1.0 / (1.0 + t)).abs() <= 1e-8);
    }

    #[test]
    fn leaving_the_domain() {
        let dom = DomainBox::builder()
            .interval("x", 0.5, 2.0)
            .exclude(Expr::var("x"))
            .build()
            .unwrap();
        let c = Chart::new(&["x"], dom).unwrap();
        // x' = -1 from x = 0.5 crosses the excluded point x = 0
        let f = TDependentField::autonomous(VectorField::parse(&c, &["-1"]).unwrap());
        match integrate(&f, &[0.5], 0.0, 1.0, 0.3) {
            Err(MotionError::LeftDomain { t, point }) => {
                assert!(t > 0.5 && point[0] > 0.0);
            }
            other => panic!("{other:?}"),
        }
        // blow-up of x' = x^2
        let c2 = Chart::new(&["x"], DomainBox::builder().interval("x", 0.0, 1.0).build().unwrap()).unwrap();
        let f = TDependentField::autonomous(VectorField::parse(&c2, &["x^3"]).unwrap());
        assert!(matches!(
            integrate(&f, &[1e100], 0.0, 1.0, 0.1),
            Err(MotionError::NonFiniteState { .. })
        ));
    }

    #[test]
    fn drift_of_simple_functions() {
        let c = o2();
        let f = schwarz(&c, "sin(t)");
        let tr = integrate(&f, &[0.0, 1.0, 0.5], 0.0, 1.0, 1e-3).unwrap();
        let r = check_constant("one", &Expr::int(7), &tr, 1e-6).unwrap();
        assert_eq!((r.max_abs, r.pass, r.initial), (0.0, true, 7.0));
        let r = check_constant("x", &Expr::var("x"), &tr, 1e-6).unwrap();
        assert!(!r.pass && r.max_rel > 0.1);
        let csv = tr.to_csv();
        assert!(csv.starts_with("t,x,v,a\n0,0,1,0.5\n"));
        assert_eq!(csv.lines().count(), 1002);
    }

    #[test]
    fn invariants_are_consistent() {
        let pc = pair();
        let mut zt = ZeroTest::new(11);
        let dom = pc.chart().sampling_domain();
        let inv = schwarzian_invariants();
        let get = |l: &str| inv.iter().find(|(k, _)| *k == l).unwrap().1.clone();
        let (c1, f1, f3, f4) = (get("C_xi1"), get("F1"), get("F3"), get("F4"));
        let rel = &f4 * &f4 - (&f3 * &f3 - Expr::int(4) * &f1 + Expr::int(16) / &c1);
        assert!(zt.is_zero(&rel, dom).unwrap());

        let p: Point = SCHWARZ_PAIR
            .iter()
            .map(|s| Symbol::new(s))
            .zip([0.0, 1.0, 0.0, 0.0, 1.0, 1.0])
            .collect();
        assert!((c1.evaluate(&p).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pc.chart().names(), SCHWARZ_PAIR);
    }

    fn prolonged_hams(pc: &ProductChart) -> [[Expr; 3]; 2] {
        let c = pc.base();
        let pr = |s: &str| crate::prolong::prolong_function(pc, &c.parse(s).unwrap());
        [
            [pr("2/v"), pr("a/v^2"), pr("a^2/(2*v^3)")],
            [pr("-4*x/v"), pr("2 - 2*a*x/v^2"), pr("2*a/v - a^2*x/v^3")],
        ]
    }

    #[test]
    fn casimirs_of_the_prolonged_algebra() {
        let pc = pair();
        let c = pc.base().clone();
        let mut zt = ZeroTest::new(12);
        let forms = vec![
            TwoForm::parse(&c, &[(1, 2, "1/v^3")]).unwrap(),
            TwoForm::parse(&c, &[(1, 2, "-2*x/v^3"), (2, 0, "-2/v^2"), (0, 1, "-2*a/v^3")]).unwrap(),
        ];
        let pforms: Vec<TwoForm> = forms
            .iter()
            .map(|w| crate::prolong::prolong_two_form(&pc, w).unwrap())
            .collect();
        let s = crate::ksymp::validate_structure(pforms, 50, &mut zt).unwrap();
        let y: Vec<VectorField> = ys(&c).iter().map(|x| prolong_field(&pc, x).unwrap()).collect();
        let h = prolonged_hams(&pc);
        let inv = schwarzian_invariants();
        let dom = pc.chart().sampling_domain();
        for (theta, printed) in [
            ([1.0, 0.0], Some("C_xi1")),
            ([0.0, 1.0], Some("C_xi2")),
            ([1.0, 1.0], None),
        ] {
            let cov = crate::ksymp::Covector::new(theta.to_vec()).unwrap();
            let w = contract_theta(&s, &cov).unwrap();
            let ht: Vec<Expr> = (0..3)
                .map(|i| {
                    (Expr::rational(theta[0] as i64, 1) * &h[0][i] + Expr::rational(theta[1] as i64, 1) * &h[1][i])
                        .simplify()
                })
                .collect();
            let cas = casimir_constant([&ht[0], &ht[1], &ht[2]], [&y[0], &y[1], &y[2]], &w, &mut zt).unwrap();
            if let Some(l) = printed {
                let want = &inv.iter().find(|(k, _)| *k == l).unwrap().1;
                assert!(zt.is_zero(&(&cas - want), dom).unwrap(), "{l}");
            } else {
                // bilinear expansion with both multipliers equal to one
                let g = |l: &str| inv.iter().find(|(k, _)| *k == l).unwrap().1.clone();
                let want = g("C_xi1") + g("C_xi2") + g("F_xi1xi2");
                assert!(zt.is_zero(&(&cas - &want), dom).unwrap());
            }
        }
        // a wrong table is refused
        let w = contract_theta(&s, &crate::ksymp::Covector::basis(2, 0)).unwrap();
        assert!(matches!(
            casimir_constant([&h[0][1], &h[0][0], &h[0][2]], [&y[1], &y[0], &y[2]], &w, &mut zt),
            Err(MotionError::BracketTableMismatch(_))
        ));
        let z = Expr::zero();
        let zf = VectorField::zero(pc.chart());
        let cas = casimir_constant([&z, &z, &z], [&zf, &zf, &zf], &w, &mut zt).unwrap();
        assert!(cas.is_const_zero());
        let _ = lie_bracket(&y[0], &y[1]).unwrap();
    }

    #[test]
    fn superposition_pairings() {
        let pc = pair();
        let c = pc.base().clone();
        let base = schwarz(&c, "sin(t)");
        let prolonged = base.prolong(&pc).unwrap();
        let (p1, p2, probe) = ([0.3, 1.2, 0.4], [-0.5, 0.8, 1.1], [1.0, 1.5, -0.3]);
        let pt = integrate(&prolonged, &pc.join(&[&p1, &p2]).unwrap(), 0.0, 1.0, 1e-3).unwrap();
        let runs = integrate_many(&base, &[probe.to_vec(), p1.to_vec()], 0.0, 1.0, 1e-3);
        let inv = schwarzian_invariants();
        let d = schwarzian_degeneracy();
        let probe_tr = runs[0].as_ref().unwrap();
        let r = superposition_check(&inv, &pc, &pt, probe_tr, 1e-6, Some(&d)).unwrap();
        assert!(!r.degenerate());
        assert_eq!(r.pairings.len(), 3);
        assert!(r.pass(), "{r:#?}");

        let same = runs[1].as_ref().unwrap();
        let r = superposition_check(&inv, &pc, &pt, same, 1e-6, Some(&d)).unwrap();
        assert!(r.degenerate());
        assert_eq!(r.pairings[2].degenerate_samples, same.len());
        assert!(r.pairings[2].drifts.is_empty());

        let short = integrate(&base, &probe, 0.0, 0.5, 1e-3).unwrap();
        assert!(matches!(
            superposition_check(&inv, &pc, &pt, &short, 1e-6, Some(&d)),
            Err(MotionError::GridMismatch(_))
        ));
    }
}
