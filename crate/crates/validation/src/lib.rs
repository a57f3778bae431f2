//! Numerical acceptance checks for `su2cs`.
//!
//! Each criterion computes a handful of named metrics and compares every one
//! against its limit; a criterion passes when all metrics do, including its
//! wall-clock budget.

mod checks;

use serde::Serialize;
use std::fmt;
use std::time::Instant;

pub use checks::{
    canonical_side, chart_compatibility, contraction_limit, infinitesimal_overlap_order, kinetic_term_agreement,
    orthogonality, path_integral_convergence, resolution_of_unity, rotation_algebra, semiclassical_precession,
    topological_structure, zero_hamiltonian_collapse,
};

/// Acceptance bound for one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Limit {
    AtMost { bound: f64 },
    Between { lo: f64, hi: f64 },
}

impl Limit {
    pub fn admits(&self, value: f64) -> bool {
        match *self {
            Limit::AtMost { bound } => value <= bound,
            Limit::Between { lo, hi } => (lo..=hi).contains(&value),
        }
    }
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Limit::AtMost { bound } => write!(f, "<= {bound:e}"),
            Limit::Between { lo, hi } => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub limit: Limit,
    pub passed: bool,
}

impl Metric {
    pub fn new(name: impl Into<String>, value: f64, limit: Limit) -> Self {
        Metric {
            name: name.into(),
            value,
            passed: limit.admits(value),
            limit,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Metric::new(name, value, Limit::AtMost { bound })
    }

    pub fn between(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Metric::new(name, value, Limit::Between { lo, hi })
    }

    /// A count of violations that must be zero.
    pub fn none(name: impl Into<String>, count: usize) -> Self {
        Metric::at_most(name, count as f64, 0.0)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {:.3e} ({})", self.name, self.value, self.limit)
    }
}

pub type CheckFn = fn() -> su2cs::Result<Vec<Metric>>;

pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub budget_s: f64,
    pub check: CheckFn,
}

pub const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, title: "resolution of unity", budget_s: 30.0, check: resolution_of_unity },
    Criterion { id: 2, title: "rotation algebra", budget_s: 5.0, check: rotation_algebra },
    Criterion { id: 3, title: "orthogonality relation", budget_s: 10.0, check: orthogonality },
    Criterion { id: 4, title: "infinitesimal overlap", budget_s: 5.0, check: infinitesimal_overlap_order },
    Criterion { id: 5, title: "kinetic term", budget_s: 5.0, check: kinetic_term_agreement },
    Criterion { id: 6, title: "discrete path-integral convergence", budget_s: 60.0, check: path_integral_convergence },
    Criterion { id: 7, title: "zero-Hamiltonian collapse", budget_s: 10.0, check: zero_hamiltonian_collapse },
    Criterion { id: 8, title: "topological and gauge structure", budget_s: 5.0, check: topological_structure },
    Criterion { id: 9, title: "semiclassical precession", budget_s: 5.0, check: semiclassical_precession },
    Criterion { id: 10, title: "high-spin contraction", budget_s: 60.0, check: contraction_limit },
    Criterion { id: 11, title: "canonical coherent states", budget_s: 30.0, check: canonical_side },
    Criterion { id: 12, title: "chart compatibility", budget_s: 10.0, check: chart_compatibility },
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub metrics: Vec<Metric>,
    /// Library error that stopped the check, if any.
    pub error: Option<String>,
    pub elapsed_s: f64,
}

impl Outcome {
    /// `criterion N  PASS|FAIL  title  (t s)` followed by the failing metrics.
    pub fn line(&self) -> String {
        let mut s = format!(
            "criterion {:>2}  {}  {}  ({:.2} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed_s
        );
        if let Some(e) = &self.error {
            s.push_str(&format!("  error: {e}"));
        }
        for m in self.metrics.iter().filter(|m| !m.passed) {
            s.push_str(&format!("\n    {m}"));
        }
        s
    }
}

pub fn criterion(id: u8) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

pub fn run(c: &Criterion) -> Outcome {
    let start = Instant::now();
    let result = (c.check)();
    let elapsed_s = start.elapsed().as_secs_f64();
    let (mut metrics, error) = match result {
        Ok(m) => (m, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    metrics.push(Metric::at_most("runtime seconds", elapsed_s, c.budget_s));
    Outcome {
        id: c.id,
        title: c.title,
        passed: error.is_none() && metrics.iter().all(|m| m.passed),
        metrics,
        error,
        elapsed_s,
    }
}

pub fn run_all() -> Vec<Outcome> {
    CRITERIA.iter().map(run).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        assert!(Limit::AtMost { bound: 0.0 }.admits(0.0));
        assert!(!Limit::AtMost { bound: 1e-10 }.admits(2e-10));
        assert!(!Limit::AtMost { bound: 1.0 }.admits(f64::NAN));
        assert!(Limit::Between { lo: 1.7, hi: 2.3 }.admits(2.3));
        assert!(!Limit::Between { lo: 1.7, hi: 2.3 }.admits(f64::NAN));
        assert!(Metric::none("count", 0).passed);
        assert!(!Metric::none("count", 1).passed);
    }

    #[test]
    fn table_is_complete() {
        for (k, c) in CRITERIA.iter().enumerate() {
            assert_eq!(c.id as usize, k + 1);
        }
        assert!(criterion(13).is_none());
    }

    #[test]
    fn failing_metric_is_listed() {
        let o = Outcome {
            id: 6,
            title: "x",
            passed: false,
            metrics: vec![Metric::at_most("err", 0.5, 0.02), Metric::at_most("ok", 0.0, 1.0)],
            error: None,
            elapsed_s: 0.1,
        };
        let line = o.line();
        assert!(line.starts_with("criterion  6  FAIL  x"));
        assert!(line.contains("err = 5.000e-1"));
        assert!(!line.contains("ok ="));
    }
}
