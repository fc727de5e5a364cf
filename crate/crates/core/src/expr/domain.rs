//! Sampling boxes and the randomized zero test.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Env, Expr, ExprError, Symbol};

pub const DEFAULT_TRIALS: usize = 25;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default distance an exclusion expression must keep from zero when sampling.
pub const DEFAULT_MARGIN: f64 = 1e-3;

/// A sample point.
pub type Point = BTreeMap<Symbol, f64>;

/// Product of closed intervals with a list of expressions that must stay
/// away from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    intervals: Vec<(Symbol, f64, f64)>,
    exclusions: Vec<Expr>,
    margin: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DomainBoxBuilder {
    intervals: Vec<(Symbol, f64, f64)>,
    exclusions: Vec<Expr>,
    margin: Option<f64>,
}

impl DomainBoxBuilder {
    pub fn interval(mut self, sym: impl Into<Symbol>, lo: f64, hi: f64) -> Self {
        self.intervals.push((sym.into(), lo, hi));
        self
    }

    pub fn exclude(mut self, e: Expr) -> Self {
        self.exclusions.push(e);
        self
    }

    pub fn margin(mut self, m: f64) -> Self {
        self.margin = Some(m);
        self
    }

    pub fn build(self) -> Result<DomainBox, ExprError> {
        let mut seen = std::collections::BTreeSet::new();
        for (s, lo, hi) in &self.intervals {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ExprError::InvalidDomain(format!(
                    "interval for `{s}` must have positive finite length, got [{lo}, {hi}]"
                )));
            }
            if !seen.insert(s.clone()) {
                return Err(ExprError::InvalidDomain(format!("`{s}` has two intervals")));
            }
        }
        for e in &self.exclusions {
            if let Some(s) = e.free_symbols().into_iter().find(|s| !seen.contains(s)) {
                return Err(ExprError::InvalidDomain(format!(
                    "exclusion `{e}` uses `{s}`, which has no interval"
                )));
            }
        }
        let margin = self.margin.unwrap_or(DEFAULT_MARGIN);
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(ExprError::InvalidDomain(format!("bad margin {margin}")));
        }
        Ok(DomainBox {
            intervals: self.intervals,
            exclusions: self.exclusions,
            margin,
        })
    }
}

impl DomainBox {
    pub fn builder() -> DomainBoxBuilder {
        DomainBoxBuilder::default()
    }

    pub fn intervals(&self) -> &[(Symbol, f64, f64)] {
        &self.intervals
    }

    pub fn exclusions(&self) -> &[Expr] {
        &self.exclusions
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn interval(&self, sym: &str) -> Option<(f64, f64)> {
        self.intervals
            .iter()
            .find(|(s, _, _)| s.as_str() == sym)
            .map(|&(_, lo, hi)| (lo, hi))
    }

    /// A copy with extra intervals and exclusions appended.
    pub fn extended(
        &self,
        intervals: impl IntoIterator<Item = (Symbol, f64, f64)>,
        exclusions: impl IntoIterator<Item = Expr>,
    ) -> Result<DomainBox, ExprError> {
        let mut b = DomainBoxBuilder {
            intervals: self.intervals.clone(),
            exclusions: self.exclusions.clone(),
            margin: Some(self.margin),
        };
        b.intervals.extend(intervals);
        b.exclusions.extend(exclusions);
        b.build()
    }

    /// Uniform draw from the box, ignoring exclusions.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        self.intervals
            .iter()
            .map(|(s, lo, hi)| (s.clone(), rng.random_range(*lo..=*hi)))
            .collect()
    }

    /// True iff every exclusion evaluates to a value of magnitude above
    /// `margin` at `env`. Undefined exclusions count as violated.
    pub fn satisfies_exclusions<E: Env + ?Sized>(&self, env: &E, margin: f64) -> bool {
        self.exclusions
            .iter()
            .all(|e| e.evaluate(env).is_ok_and(|v| v.abs() > margin))
    }

    /// Inside the closed box and clear of the exclusions by the sampling margin.
    pub fn admits(&self, p: &Point) -> bool {
        self.intervals
            .iter()
            .all(|(s, lo, hi)| p.get(s).is_some_and(|v| *lo <= *v && *v <= *hi))
            && self.satisfies_exclusions(p, self.margin)
    }
}

/// Randomized identity checker with an explicit seeded generator.
#[derive(Debug, Clone)]
pub struct ZeroTest {
    trials: usize,
    tol: f64,
    rng: ChaCha8Rng,
}

impl ZeroTest {
    pub fn new(seed: u64) -> Self {
        ZeroTest {
            trials: DEFAULT_TRIALS,
            tol: DEFAULT_TOL,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn with_settings(seed: u64, trials: usize, tol: f64) -> Result<Self, ExprError> {
        if trials == 0 {
            return Err(ExprError::InvalidSettings("trials must be at least 1".into()));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(ExprError::InvalidSettings(format!("tol must be positive, got {tol}")));
        }
        Ok(ZeroTest {
            trials,
            tol,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// An independent tester whose stream is derived from this one.
    pub fn fork(&mut self) -> ZeroTest {
        ZeroTest {
            trials: self.trials,
            tol: self.tol,
            rng: ChaCha8Rng::seed_from_u64(self.rng.random()),
        }
    }

    fn rejection_limit(&self) -> usize {
        100 * self.trials
    }

    /// `n` admissible points of `dom`.
    pub fn sample_points(&mut self, dom: &DomainBox, n: usize) -> Result<Vec<Point>, ExprError> {
        let limit = self.rejection_limit();
        let mut out = Vec::with_capacity(n);
        let mut rejected = 0;
        while out.len() < n {
            let p = dom.draw(&mut self.rng);
            if dom.admits(&p) {
                rejected = 0;
                out.push(p);
            } else {
                rejected += 1;
                if rejected >= limit {
                    return Err(ExprError::DomainExhausted(rejected));
                }
            }
        }
        Ok(out)
    }

    /// Probabilistic check that `e` vanishes identically on `dom`.
    pub fn is_zero(&mut self, e: &Expr, dom: &DomainBox) -> Result<bool, ExprError> {
        Ok(self.witness_nonzero(e, dom)?.is_none())
    }

    /// Returns a point where `e` is visibly nonzero, or `None` if every
    /// trial passed.
    pub fn witness_nonzero(&mut self, e: &Expr, dom: &DomainBox) -> Result<Option<Point>, ExprError> {
        let s = e.simplify();
        if s.is_const_zero() {
            return Ok(None);
        }
        let limit = self.rejection_limit();
        let mut accepted = 0;
        let mut rejected = 0;
        while accepted < self.trials {
            let p = dom.draw(&mut self.rng);
            let value = if dom.admits(&p) {
                match s.evaluate_with_scale(&p) {
                    Ok(v) => Some(v),
                    Err(ExprError::UndefinedAtPoint(_)) => None,
                    Err(other) => return Err(other),
                }
            } else {
                None
            };
            match value {
                Some((v, scale)) => {
                    rejected = 0;
                    accepted += 1;
                    if v.abs() > self.tol * (1.0 + scale) {
                        return Ok(Some(p));
                    }
                }
                None => {
                    rejected += 1;
                    if rejected >= limit {
                        return Err(ExprError::DomainExhausted(rejected));
                    }
                }
            }
        }
        Ok(None)
    }
}
