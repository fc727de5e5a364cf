//! The `integrate` command.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use kslie::expr::{Expr, Parser};
use kslie::motion::{check_constant, integrate, DriftReport, MotionError, Trajectory};
use kslie::registry::{ExampleRecord, RegistryError};
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

/// The CLI caps the number of copies.
pub const MAX_COPIES: usize = 4;
pub const DEFAULT_DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    /// One state per copy, or empty for the registry defaults.
    pub states: Vec<Vec<f64>>,
    pub copies: Option<usize>,
    pub t1: f64,
    pub step: f64,
    /// `name=expr` overrides of the t-dependent coefficients.
    pub coeffs: Vec<(String, String)>,
    pub invariants: bool,
    pub drift_tol: f64,
    pub seed: Option<u64>,
}

impl Default for Request {
    fn default() -> Self {
        Request {
            states: Vec::new(),
            copies: None,
            t1: 1.0,
            step: kslie::motion::DEFAULT_STEP,
            coeffs: Vec::new(),
            invariants: false,
            drift_tol: DEFAULT_DRIFT_TOL,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub label: String,
    pub initial: f64,
    pub max_abs: f64,
    pub max_rel: f64,
    pub tol: f64,
    pub pass: bool,
}

impl From<DriftReport> for Drift {
    fn from(d: DriftReport) -> Self {
        Drift {
            label: d.label,
            initial: d.initial,
            max_abs: d.max_abs,
            max_rel: d.max_rel,
            tol: d.tol,
            pass: d.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrateReport {
    pub id: String,
    pub copies: usize,
    pub method: String,
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
    pub samples: usize,
    /// The coefficient of each basis field, as integrated.
    pub coefficients: Vec<String>,
    pub initial: Vec<f64>,
    pub last: Option<Vec<f64>>,
    pub drift: Vec<Drift>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl IntegrateReport {
    pub fn pass(&self) -> bool {
        self.drift.iter().all(|d| d.pass)
    }

    pub fn to_text(&self) -> String {
        let copies = if self.copies == 1 {
            "1 copy".to_string()
        } else {
            format!("{} copies", self.copies)
        };
        let mut out = format!(
            "{}: {copies}, {} on [{}, {}] with step {}: {} samples\n",
            self.id, self.method, self.t0, self.t1, self.step, self.samples
        );
        if let Some(last) = &self.last {
            let _ = writeln!(out, "last state {last:?}");
        }
        for d in &self.drift {
            let _ = writeln!(
                out,
                "  {:<10} initial {:>14.8e}  max abs {:.3e}  max rel {:.3e}  {}",
                d.label,
                d.initial,
                d.max_abs,
                d.max_rel,
                crate::text::mark(d.pass)
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        out
    }
}

/// Parses `1,2,-0.5`.
pub fn parse_state(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            x.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{x}` is not a finite number"))
        })
        .collect()
}

/// Parses `name=expr` with `expr` in `t`.
pub fn parse_coeff(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=expr, got `{s}`"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return Err(format!("expected name=expr, got `{s}`"));
    }
    Ok((k.to_string(), v.to_string()))
}

fn resolve_states(rec: &ExampleRecord, req: &Request) -> Result<(usize, Vec<Vec<f64>>)> {
    let n = rec.chart().dim();
    let states: Vec<Vec<f64>> = if req.states.is_empty() {
        let ics = rec.initial_conditions();
        let m = req.copies.unwrap_or(ics.len().max(1));
        if ics.len() < m {
            return Err(CliError::Usage(format!(
                "`{}` has {} default initial conditions; pass --x0 for {m} copies",
                rec.id(),
                ics.len()
            )));
        }
        ics[..m].to_vec()
    } else if req.states.len() == 1 && req.copies.is_some_and(|m| m > 1 && req.states[0].len() == m * n) {
        req.states[0].chunks(n).map(<[f64]>::to_vec).collect()
    } else {
        req.states.clone()
    };
    let m = req.copies.unwrap_or(states.len());
    if m == 0 || m > MAX_COPIES {
        return Err(CliError::Usage(format!("--prolong must be between 1 and {MAX_COPIES}")));
    }
    if states.len() != m {
        return Err(CliError::Usage(format!(
            "{m} copies need {m} initial states, got {}",
            states.len()
        )));
    }
    if let Some(bad) = states.iter().find(|s| s.len() != n) {
        return Err(CliError::Usage(format!(
            "initial states of `{}` have {n} entries, got {}",
            rec.id(),
            bad.len()
        )));
    }
    Ok((m, states))
}

fn overrides(req: &Request) -> Result<Vec<(String, Expr)>> {
    let parser = Parser::new(&[] as &[&str]);
    req.coeffs
        .iter()
        .map(|(k, v)| {
            parser
                .parse(v)
                .map(|e| (k.clone(), e))
                .map_err(|e| CliError::Usage(format!("--coeff {k}: {e}")))
        })
        .collect()
}

fn motion_error(e: MotionError) -> CliError {
    match e {
        MotionError::LeftDomain { t, point } => {
            CliError::Runtime(format!("left the domain at t = {t}; last valid state {point:?}"))
        }
        MotionError::NonFiniteState { t, point } => {
            CliError::Runtime(format!("non-finite state after t = {t}; last valid state {point:?}"))
        }
        MotionError::InvalidStep(_) | MotionError::InvalidInterval { .. } => CliError::Usage(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

/// Integrates the registered system of `rec` and measures invariant drift.
pub fn run(rec: &ExampleRecord, req: &Request) -> Result<(IntegrateReport, Trajectory)> {
    let (m, states) = resolve_states(rec, req)?;
    let base = rec.system(&overrides(req)?)?;
    let pc = rec.product_chart(m)?;
    let (sys, x0) = if m == 1 {
        (base, states[0].clone())
    } else {
        let parts: Vec<&[f64]> = states.iter().map(Vec::as_slice).collect();
        let x0 = pc.join(&parts).map_err(RegistryError::from)?;
        (base.prolong(&pc).map_err(motion_error)?, x0)
    };
    if !pc
        .chart()
        .domain()
        .satisfies_exclusions(&point_env(pc.chart(), &x0), 0.0)
    {
        return Err(CliError::Usage(format!("initial state {x0:?} lies on an excluded set")));
    }
    let traj = integrate(&sys, &x0, 0.0, req.t1, req.step)
        .map_err(motion_error)?
        .labeled(rec.id(), req.seed);
    let mut report = IntegrateReport {
        id: rec.id().to_string(),
        copies: m,
        method: traj.meta().method.to_string(),
        t0: traj.meta().t0,
        t1: traj.meta().t1,
        step: traj.meta().step,
        samples: traj.len(),
        coefficients: sys.coefficients().iter().map(ToString::to_string).collect(),
        initial: x0,
        last: traj.last().map(|(_, x)| x.to_vec()),
        drift: Vec::new(),
        notes: Vec::new(),
    };
    if req.invariants {
        let invs = rec.invariants()?;
        let here: Vec<_> = invs.iter().filter(|i| i.copies == m).collect();
        if here.is_empty() {
            report.notes.push(format!("no registered invariants on {m} copies"));
        } else if traj.is_empty() {
            report.notes.push("empty trajectory, nothing to measure".into());
        } else {
            for inv in here {
                let d = check_constant(&inv.label, &inv.expr, &traj, req.drift_tol).map_err(motion_error)?;
                report.drift.push(d.into());
            }
        }
    }
    Ok((report, traj))
}

fn point_env(chart: &kslie::geom::Chart, x: &[f64]) -> kslie::expr::Point {
    chart.symbols().iter().cloned().zip(x.iter().copied()).collect()
}

/// Writes `<id>.csv` and `<id>.drift.json` into `dir`.
pub fn write_outputs(dir: &Path, report: &IntegrateReport, traj: &Trajectory) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let csv = dir.join(format!("{}.csv", report.id));
    std::fs::write(&csv, traj.to_csv()).map_err(|e| CliError::io(&csv, e))?;
    let json = dir.join(format!("{}.drift.json", report.id));
    let body = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(&json, body).map_err(|e| CliError::io(&json, e))?;
    Ok(vec![csv, json])
}

#[cfg(test)]
mod tests {
    use super::*;
    use kslie::registry::example;

    #[test]
    fn parsing() {
        assert_eq!(parse_state("0, 1,-2.5").unwrap(), vec![0.0, 1.0, -2.5]);
        assert!(parse_state("1,x").is_err());
        assert!(parse_state("1,inf").is_err());
        assert_eq!(parse_coeff("a=sin(t)").unwrap(), ("a".into(), "sin(t)".into()));
        assert!(parse_coeff("a").is_err());
    }

    #[test]
    fn riccati_closed_form() {
        let rec = example("riccati4").unwrap();
        let req = Request {
            states: vec![vec![-1.0, -2.0, -3.0, -4.0]],
            coeffs: vec![
                ("a".into(), "0".into()),
                ("b".into(), "0".into()),
                ("c".into(), "1".into()),
            ],
            invariants: true,
            ..Request::default()
        };
        let (r, _) = run(&rec, &req).unwrap();
        let last = r.last.clone().unwrap();
        for (x0, x) in [-1.0, -2.0, -3.0, -4.0].iter().zip(&last) {
            assert!((x - x0 / (1.0 - x0)).abs() < 1e-8);
        }
        assert!(r.pass());
        assert_eq!(r.drift.len(), 1);
    }

    #[test]
    fn schwarz_pair_invariants() {
        let rec = example("schwarz3ks").unwrap();
        let req = Request {
            states: vec![vec![0.0, 1.0, 0.0], vec![1.0, 2.0, 1.0]],
            copies: Some(2),
            invariants: true,
            ..Request::default()
        };
        let (r, traj) = run(&rec, &req).unwrap();
        assert_eq!(r.drift.len(), 6);
        assert!(r.pass(), "{}", r.to_text());
        assert_eq!(traj.chart().dim(), 6);
    }

    #[test]
    fn bad_requests() {
        let rec = example("schwarz3ks").unwrap();
        let five = Request {
            copies: Some(5),
            ..Request::default()
        };
        assert!(matches!(run(&rec, &five), Err(CliError::Usage(_))));
        let short = Request {
            states: vec![vec![1.0]],
            ..Request::default()
        };
        assert!(matches!(run(&rec, &short), Err(CliError::Usage(_))));
        let excluded = Request {
            states: vec![vec![0.0, 0.0, 1.0]],
            ..Request::default()
        };
        assert!(matches!(run(&rec, &excluded), Err(CliError::Usage(_))));
        let unknown = Request {
            states: vec![vec![0.0, 1.0, 0.0]],
            coeffs: vec![("zz".into(), "1".into())],
            ..Request::default()
        };
        assert!(matches!(run(&rec, &unknown), Err(CliError::Usage(_))));
    }

    #[test]
    fn zero_length_interval() {
        let rec = example("schwarz3ks").unwrap();
        let req = Request {
            states: vec![vec![0.0, 1.0, 0.0]],
            t1: 0.0,
            invariants: true,
            ..Request::default()
        };
        let (r, traj) = run(&rec, &req).unwrap();
        assert_eq!(r.samples, 0);
        assert!(traj.is_empty());
        assert!(r.pass());
    }

    #[test]
    fn concatenated_state() {
        let rec = example("schwarz3ks").unwrap();
        let req = Request {
            states: vec![vec![0.0, 1.0, 0.0, 1.0, 2.0, 1.0]],
            copies: Some(2),
            t1: 0.1,
            ..Request::default()
        };
        assert_eq!(run(&rec, &req).unwrap().0.copies, 2);
    }
}
