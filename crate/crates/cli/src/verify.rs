//! The `verify` suites.

use std::fmt::Write;

use clap::ValueEnum;
use kslie::expr::{Expr, ZeroTest};
use kslie::geom::{interior_product, lie_bracket, OneForm};
use kslie::ksymp::{
    assess_structure, bracket_omega, check_omega_hamiltonian, hamiltonian_residual, KSymplecticStructure,
    DEFAULT_SAMPLES,
};
use kslie::liealg::{assess_stability, structure_constants};
use kslie::registry::{product_not_hamiltonian_witness, ExampleRecord};
use serde::{Deserialize, Serialize};

use crate::text::{combination, indexed, mark, point, sub, sup};
use crate::{Result, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Structure,
    Hamiltonian,
    Algebra,
    Brackets,
    Stability,
    All,
}

pub const SUITES: [Suite; 5] = [
    Suite::Structure,
    Suite::Hamiltonian,
    Suite::Algebra,
    Suite::Brackets,
    Suite::Stability,
];

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Structure => "structure",
            Suite::Hamiltonian => "hamiltonian",
            Suite::Algebra => "algebra",
            Suite::Brackets => "brackets",
            Suite::Stability => "stability",
            Suite::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => SUITES.to_vec(),
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
}

impl Check {
    fn new(label: impl Into<String>, pass: bool, certificate: Option<String>) -> Self {
        Check {
            label: label.into(),
            pass,
            certificate,
        }
    }

    fn error(label: impl Into<String>, e: impl std::fmt::Display) -> Self {
        Check::new(label, false, Some(format!("error: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSummary {
    pub valid: bool,
    pub k: usize,
    pub dim: usize,
    pub min_rank: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub id: String,
    pub title: String,
    pub settings: Settings,
    pub suites: Vec<SuiteReport>,
    #[serde(default)]
    pub structure: Option<StructureSummary>,
    /// Whether every recovered structure constant equals the expected one.
    #[serde(default)]
    pub constants_match: Option<bool>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.suites.iter().all(SuiteReport::pass)
    }

    pub fn counts(&self) -> (usize, usize) {
        self.suites
            .iter()
            .fold((0, 0), |(p, t), s| (p + s.passed(), t + s.checks.len()))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}: {} (seed {})\n", self.id, self.title, self.settings.seed);
        for s in &self.suites {
            let _ = writeln!(out, "{} ({}/{})", s.suite.name(), s.passed(), s.checks.len());
            for c in &s.checks {
                let _ = write!(out, "  {} {}", c.label, mark(c.pass));
                if let Some(cert) = &c.certificate {
                    let _ = write!(out, "  [{cert}]");
                }
                out.push('\n');
            }
            for n in &s.notes {
                let _ = writeln!(out, "  note: {n}");
            }
        }
        let (p, t) = self.counts();
        let _ = writeln!(
            out,
            "{}: {p}/{t} checks passed",
            if self.pass() { "PASS" } else { "FAIL" }
        );
        out
    }
}

fn omega(i: usize) -> String {
    format!("ω{}", sub(i + 1))
}

fn h_label(a: usize) -> String {
    format!("h{}", sup(a + 1))
}

/// The first nonzero component of a residual, with a point where it shows.
fn residual_witness(rec: &ExampleRecord, r: &OneForm, zt: &mut ZeroTest) -> Option<String> {
    let dom = rec.chart().sampling_domain().clone();
    for (l, c) in r.coefficients().iter().enumerate() {
        if let Ok(Some(p)) = zt.witness_nonzero(c, &dom) {
            return Some(format!(
                "d{} component nonzero at {}",
                rec.chart().names()[l],
                point(&p)
            ));
        }
    }
    None
}

/// Runs `suites` on `rec`. Failures inside a check are reported as failing
/// checks rather than errors.
pub fn verify(rec: &ExampleRecord, suites: &[Suite], settings: &Settings) -> Result<VerifyReport> {
    let mut report = VerifyReport {
        id: rec.id().to_string(),
        title: rec.title().to_string(),
        settings: *settings,
        suites: Vec::new(),
        structure: None,
        constants_match: None,
    };
    let mut selected: Vec<Suite> = suites.iter().flat_map(|s| s.expand()).collect();
    selected.dedup();
    for suite in selected {
        let mut zt = settings.zero_test(suite.name())?;
        let s = match suite {
            Suite::Structure => structure_suite(rec, &mut zt, &mut report),
            Suite::Hamiltonian => hamiltonian_suite(rec, &mut zt),
            Suite::Algebra => algebra_suite(rec, &mut zt, &mut report),
            Suite::Brackets => brackets_suite(rec, &mut zt),
            Suite::Stability => stability_suite(rec, &mut zt),
            Suite::All => unreachable!(),
        };
        report.suites.push(s);
    }
    Ok(report)
}

fn structure_suite(rec: &ExampleRecord, zt: &mut ZeroTest, report: &mut VerifyReport) -> SuiteReport {
    let mut s = SuiteReport {
        suite: Suite::Structure,
        checks: Vec::new(),
        notes: Vec::new(),
    };
    let v = match assess_structure(rec.forms(), DEFAULT_SAMPLES, zt) {
        Ok(v) => v,
        Err(e) => {
            s.checks.push(Check::error("structure assessment", e));
            return s;
        }
    };
    for (i, c) in v.closedness.iter().enumerate() {
        let cert = c.map(|(l, m, p)| {
            let n = rec.chart().names();
            format!("cyclic sum nonzero for ({}, {}, {})", n[l], n[m], n[p])
        });
        s.checks
            .push(Check::new(format!("d{} = 0", omega(i)), c.is_none(), cert));
    }
    let nondegenerate = v.degenerate_at.is_none();
    let cert = match &v.degenerate_at {
        Some(p) => format!("rank {} < {} at {p}", v.min_rank, v.dim),
        None => format!(
            "rank {} at {} points, min singular ratio {:.3e}",
            v.min_rank, v.samples, v.min_singular_ratio
        ),
    };
    let forms = (0..v.k).map(omega).collect::<Vec<_>>().join(", ");
    s.checks.push(Check::new(
        format!("ker {forms} intersect trivially"),
        nondegenerate,
        Some(cert),
    ));
    s.checks.push(Check::new(
        format!("{}-symplectic structure on R{}", v.k, sup(v.dim)),
        v.is_valid(),
        None,
    ));
    if let Some(w) = &v.dimension_warning {
        s.notes.push(w.clone());
    }
    report.structure = Some(StructureSummary {
        valid: v.is_valid(),
        k: v.k,
        dim: v.dim,
        min_rank: v.min_rank,
        samples: v.samples,
    });
    s
}

fn hamiltonian_suite(rec: &ExampleRecord, zt: &mut ZeroTest) -> SuiteReport {
    let mut s = SuiteReport {
        suite: Suite::Hamiltonian,
        checks: Vec::new(),
        notes: Vec::new(),
    };
    let sym = rec.field_symbol();
    for a in 0..rec.fields().len() {
        for i in 0..rec.k() {
            let printed = &rec.source().hamiltonians[a][i];
            let label = format!("ι({}){} = d({printed})", indexed(sym, a), omega(i));
            let check = match hamiltonian_residual(&rec.fields()[a], &rec.forms()[i], rec.hamiltonian(a, i)) {
                Ok(r) => match r.is_zero(zt) {
                    Ok(true) => Check::new(label, true, None),
                    Ok(false) => {
                        let w = residual_witness(rec, &r, zt);
                        Check::new(label, false, w)
                    }
                    Err(e) => Check::error(label, e),
                },
                Err(e) => Check::error(label, e),
            };
            s.checks.push(check);
        }
    }
    match rec.structure(DEFAULT_SAMPLES, zt) {
        Ok(st) => {
            for a in 0..rec.fields().len() {
                let label = format!("{} is Ω-Hamiltonian with {}", indexed(sym, a), h_label(a));
                s.checks.push(
                    match check_omega_hamiltonian(&rec.fields()[a], &st, &rec.omega_hamiltonian(a), zt) {
                        Ok(p) => Check::new(label, p, None),
                        Err(e) => Check::error(label, e),
                    },
                );
            }
        }
        Err(e) => s.checks.push(Check::error("Ω-Hamiltonian tuples", e)),
    }
    s
}

fn algebra_suite(rec: &ExampleRecord, zt: &mut ZeroTest, report: &mut VerifyReport) -> SuiteReport {
    let mut s = SuiteReport {
        suite: Suite::Algebra,
        checks: Vec::new(),
        notes: Vec::new(),
    };
    let sym = rec.field_symbol();
    let r = rec.fields().len();
    let model = match structure_constants(rec.fields(), zt) {
        Ok(m) => m,
        Err(e) => {
            s.checks.push(Check::error("structure constants", e));
            report.constants_match = Some(false);
            return s;
        }
    };
    let mut all = true;
    for a in 0..r {
        for b in a + 1..r {
            let expected = rec.expected_bracket(a, b);
            let got = model.bracket_coefficients(a, b);
            let pass = got == expected;
            all &= pass;
            let cert = (!pass).then(|| format!("recovered {}", combination(sym, got)));
            let label = format!(
                "[{},{}]={}",
                indexed(sym, a),
                indexed(sym, b),
                combination(sym, expected)
            );
            s.checks.push(Check::new(label, pass, cert));
        }
    }
    s.checks.push(Check::new(
        "Jacobi identity on the constants",
        model.jacobi_holds(),
        None,
    ));
    if let Some(worst) = model.certificates().iter().map(|c| c.residual).max_by(f64::total_cmp) {
        s.notes
            .push(format!("largest least-squares residual before rounding {worst:.2e}"));
    }
    report.constants_match = Some(all);
    s
}

fn coefficient_prefix(c: &Expr) -> String {
    let s = match c.simplify().as_const() {
        Some(q) => kslie::liealg::format_rational(q),
        None => format!("({c})"),
    };
    match s.as_str() {
        "1" => String::new(),
        "-1" => "-".into(),
        other => other.to_string(),
    }
}

fn brackets_suite(rec: &ExampleRecord, zt: &mut ZeroTest) -> SuiteReport {
    let mut s = SuiteReport {
        suite: Suite::Brackets,
        checks: Vec::new(),
        notes: Vec::new(),
    };
    let table = rec.bracket_table();
    let is_rs = rec.id() == "diffusion-rs";
    if table.is_empty() && !is_rs {
        s.notes.push("no bracket table registered".into());
        return s;
    }
    let st: KSymplecticStructure = match rec.structure(DEFAULT_SAMPLES, zt) {
        Ok(st) => st,
        Err(e) => {
            s.checks.push(Check::error("brackets", e));
            return s;
        }
    };
    for (a, b, c, g) in table {
        let label = format!(
            "{{{},{}}}_Ω = {}{}",
            h_label(*a),
            h_label(*b),
            coefficient_prefix(c),
            h_label(*g)
        );
        let f = rec.fields();
        let check = bracket_omega(
            &st,
            &rec.omega_hamiltonian(*a),
            &rec.omega_hamiltonian(*b),
            &f[*a],
            &f[*b],
            zt,
        )
        .and_then(|br| br.sub(&rec.omega_hamiltonian(*g).scale(c)))
        .and_then(|d| d.is_zero(rec.chart(), zt));
        s.checks.push(match check {
            Ok(p) => Check::new(label, p, None),
            Err(e) => Check::error(label, e),
        });
    }
    if is_rs {
        let label = format!("{}·{} is not Ω-Hamiltonian", h_label(2), h_label(1));
        s.checks.push(match product_not_hamiltonian_witness(zt) {
            Ok(w) => {
                let cert = w.certificate.as_ref().map(|(p, (i, j), d)| {
                    let d: Vec<String> = d.iter().map(|x| format!("{x}")).collect();
                    format!(
                        "candidate fields for {} and {} differ by ({}) at {}",
                        omega(*i),
                        omega(*j),
                        d.join(", "),
                        point(p)
                    )
                });
                Check::new(label, w.differ && cert.is_some(), cert)
            }
            Err(e) => Check::error(label, e),
        });
    }
    s
}

fn stability_suite(rec: &ExampleRecord, zt: &mut ZeroTest) -> SuiteReport {
    let mut s = SuiteReport {
        suite: Suite::Stability,
        checks: Vec::new(),
        notes: Vec::new(),
    };
    let sym = rec.field_symbol();
    for i in 0..rec.k() {
        let ker = rec.kernel(i);
        if ker.is_empty() {
            s.notes.push(format!("ker {} = 0", omega(i)));
            continue;
        }
        let label = format!("ker {} is stable under the fields", omega(i));
        s.checks.push(match assess_stability(rec.fields(), ker, zt) {
            Ok(r) => {
                let how = if r.certified { "certified by minors" } else { "numeric" };
                let mut cert = format!("rank {}, {how}", r.rank);
                for (x, y) in &r.failures {
                    let _ = write!(cert, "; [{},Z{}] leaves it", indexed(sym, *x), sub(y + 1));
                }
                Check::new(label, r.stable, Some(cert))
            }
            Err(e) => Check::error(label, e),
        });
        for (a, x) in rec.fields().iter().enumerate() {
            for (j, z) in ker.iter().enumerate() {
                let label = format!("ι([{},Z{}]){} = 0", indexed(sym, a), sub(j + 1), omega(i));
                let res = lie_bracket(x, z)
                    .and_then(|br| interior_product(&br, &rec.forms()[i]))
                    .and_then(|r| r.is_zero(zt));
                s.checks.push(match res {
                    Ok(p) => Check::new(label, p, None),
                    Err(e) => Check::error(label, e),
                });
            }
        }
    }
    s
}
