//! Cached results and the aggregate `report` document.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::integrate::{self, IntegrateReport};
use crate::verify::{verify, StructureSummary, Suite, VerifyReport};
use crate::{CliError, Library, Result, Settings};

/// Latest results per example id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Cache {
    #[serde(default)]
    pub verify: BTreeMap<String, VerifyReport>,
    #[serde(default)]
    pub integrate: BTreeMap<String, IntegrateReport>,
}

impl Cache {
    /// A missing file is an empty cache.
    pub fn load(path: &Path) -> Result<Cache> {
        match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text).map_err(|source| CliError::Json {
                path: path.display().to_string(),
                source,
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Cache::default()),
            Err(e) => Err(CliError::io(path, e)),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let body = serde_json::to_string_pretty(self).expect("cache serializes");
        std::fs::write(path, body).map_err(|e| CliError::io(path, e))
    }

    pub fn is_empty(&self) -> bool {
        self.verify.is_empty() && self.integrate.is_empty()
    }

    /// Merges a verify run, keeping suites that this run did not touch.
    pub fn record_verify(&mut self, r: VerifyReport) {
        match self.verify.get_mut(&r.id) {
            Some(old) if old.settings == r.settings => {
                for s in r.suites {
                    old.suites.retain(|o| o.suite != s.suite);
                    old.suites.push(s);
                }
                old.suites
                    .sort_by_key(|s| crate::verify::SUITES.iter().position(|x| *x == s.suite));
                if r.structure.is_some() {
                    old.structure = r.structure;
                }
                if r.constants_match.is_some() {
                    old.constants_match = r.constants_match;
                }
            }
            _ => {
                self.verify.insert(r.id.clone(), r);
            }
        }
    }

    pub fn record_integrate(&mut self, r: IntegrateReport) {
        self.integrate.insert(r.id.clone(), r);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Count {
    pub passed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCount {
    pub suite: Suite,
    pub passed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftMax {
    pub label: String,
    pub max_abs: f64,
    pub max_rel: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleSummary {
    pub id: String,
    pub title: String,
    pub structure: Option<StructureSummary>,
    pub identities: Count,
    pub suites: Vec<SuiteCount>,
    pub constants_match: Option<bool>,
    pub copies: Option<usize>,
    pub drift: Vec<DriftMax>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub examples: Vec<ExampleSummary>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.examples.iter().all(|e| e.pass)
    }

    pub fn to_text(&self) -> String {
        if self.examples.is_empty() {
            return "no results: run `kslie verify` or `kslie report --run-all` first\n".into();
        }
        let mut out = String::new();
        for e in &self.examples {
            let _ = writeln!(out, "== {} ({})", e.id, e.title);
            match &e.structure {
                Some(s) => {
                    let _ = writeln!(
                        out,
                        "  structure        {}-symplectic on R^{}: {}",
                        s.k,
                        s.dim,
                        if s.valid { "valid" } else { "INVALID" }
                    );
                }
                None => out.push_str("  structure        not run\n"),
            }
            let _ = writeln!(out, "  identities       {}/{}", e.identities.passed, e.identities.total);
            for s in &e.suites {
                let _ = writeln!(out, "    {:<14} {}/{}", s.suite.name(), s.passed, s.total);
            }
            let cm = match e.constants_match {
                Some(true) => "exact match",
                Some(false) => "MISMATCH",
                None => "not run",
            };
            let _ = writeln!(out, "  constants        {cm}");
            if e.drift.is_empty() {
                out.push_str("  drift            none recorded\n");
            } else {
                match e.copies.unwrap_or(1) {
                    1 => out.push_str("  drift (1 copy)\n"),
                    m => {
                        let _ = writeln!(out, "  drift ({m} copies)");
                    }
                }
                for d in &e.drift {
                    let _ = writeln!(
                        out,
                        "    {:<14} max rel {:.3e} (tol {:.0e}) {}",
                        d.label,
                        d.max_rel,
                        d.tol,
                        crate::text::mark(d.pass)
                    );
                }
            }
            let _ = writeln!(out, "  verdict          {}", if e.pass { "PASS" } else { "FAIL" });
        }
        out
    }
}

fn summarize(id: &str, title: &str, v: Option<&VerifyReport>, i: Option<&IntegrateReport>) -> ExampleSummary {
    let suites: Vec<SuiteCount> = v
        .map(|v| {
            v.suites
                .iter()
                .map(|s| SuiteCount {
                    suite: s.suite,
                    passed: s.passed(),
                    total: s.checks.len(),
                })
                .collect()
        })
        .unwrap_or_default();
    let (passed, total) = v.map(VerifyReport::counts).unwrap_or((0, 0));
    let drift: Vec<DriftMax> = i
        .map(|i| {
            i.drift
                .iter()
                .map(|d| DriftMax {
                    label: d.label.clone(),
                    max_abs: d.max_abs,
                    max_rel: d.max_rel,
                    tol: d.tol,
                    pass: d.pass,
                })
                .collect()
        })
        .unwrap_or_default();
    ExampleSummary {
        id: id.to_string(),
        title: title.to_string(),
        structure: v.and_then(|v| v.structure.clone()),
        identities: Count { passed, total },
        constants_match: v.and_then(|v| v.constants_match),
        copies: i.map(|i| i.copies),
        pass: passed == total && drift.iter().all(|d| d.pass),
        suites,
        drift,
    }
}

/// One summary per cached id, in library order.
pub fn build(cache: &Cache, lib: &Library) -> Report {
    let mut ids = lib.ids();
    for id in cache.verify.keys().chain(cache.integrate.keys()) {
        if !ids.contains(id) {
            ids.push(id.clone());
        }
    }
    let examples = ids
        .iter()
        .filter(|id| cache.verify.contains_key(*id) || cache.integrate.contains_key(*id))
        .map(|id| {
            let v = cache.verify.get(id);
            let i = cache.integrate.get(id);
            let title = v
                .map(|v| v.title.clone())
                .or_else(|| lib.get(id).ok().map(|r| r.title().to_string()))
                .unwrap_or_default();
            summarize(id, &title, v, i)
        })
        .collect();
    Report {
        tool: "kslie".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        examples,
    }
}

/// Runs every suite on every example, plus the default integration of
/// examples with registered invariants, in parallel across examples.
pub fn run_all(lib: &Library, settings: &Settings) -> Result<Cache> {
    let ids = lib.ids();
    let results: Vec<Result<(VerifyReport, Option<IntegrateReport>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ids
            .iter()
            .map(|id| {
                scope.spawn(move || {
                    let rec = lib.get(id)?;
                    let v = verify(&rec, &[Suite::All], settings)?;
                    let i = if rec.initial_conditions().is_empty() {
                        None
                    } else {
                        let req = integrate::Request {
                            invariants: true,
                            seed: Some(settings.seed),
                            ..integrate::Request::default()
                        };
                        Some(integrate::run(&rec, &req)?.0)
                    };
                    Ok((v, i))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect()
    });
    let mut cache = Cache::default();
    for r in results {
        let (v, i) = r?;
        cache.record_verify(v);
        if let Some(i) = i {
            cache.record_integrate(i);
        }
    }
    Ok(cache)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_cache_notice() {
        let r = build(&Cache::default(), &Library::new());
        assert!(r.examples.is_empty());
        assert!(r.to_text().starts_with("no results"));
    }

    #[test]
    fn merge_keeps_other_suites() {
        let rec = kslie::registry::example("lotka-volterra").unwrap();
        let s = Settings::default();
        let mut c = Cache::default();
        c.record_verify(verify(&rec, &[Suite::Algebra], &s).unwrap());
        c.record_verify(verify(&rec, &[Suite::Structure], &s).unwrap());
        let v = &c.verify["lotka-volterra"];
        assert_eq!(v.suites.len(), 2);
        assert_eq!(v.suites[0].suite, Suite::Structure);
        assert_eq!(v.constants_match, Some(true));
        let r = build(&c, &Library::new());
        assert_eq!(r.examples.len(), 1);
        assert!(r.examples[0].pass);
        assert!(r.to_text().contains("4-symplectic on R^5: valid"));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/cache.json");
        assert!(Cache::load(&path).unwrap().is_empty());
        let mut c = Cache::default();
        let rec = kslie::registry::example("control2").unwrap();
        c.record_verify(verify(&rec, &[Suite::Algebra], &Settings::default()).unwrap());
        c.save(&path).unwrap();
        assert_eq!(Cache::load(&path).unwrap(), c);
    }
}
