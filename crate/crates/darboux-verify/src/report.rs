//! Run reports with a canonical JSON layout.
//!
//! The serialized key order is fixed by struct declaration order, and
//! every number is produced by the same deterministic computation, so
//! two runs over the same scenario and seed emit byte-identical files:
//!
//! ```json
//! {
//!   "suites": [
//!     { "name": "...", "cases": [
//!       { "name": "...", "samples": 50, "skipped": 0,
//!         "max_abs_err": 1e-9, "max_rel_err": 1e-9, "tol": 1e-5, "pass": true }
//!     ] }
//!   ],
//!   "env": { "seed": 42, "eps": 1e-3, "stencil": "central4", "rk4_steps": 32, "version": "..." }
//! }
//! ```
//!
//! A case passes when `max_rel_err <= tol` and at most 20% of its
//! samples were skipped for leaving the chart.

use serde::Serialize;

/// Fraction of samples a case may skip before it fails: one in five.
pub const MAX_SKIP_NUM: usize = 1;
pub const MAX_SKIP_DEN: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub samples: usize,
    pub skipped: usize,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CaseReport {
    pub fn build(
        name: &str,
        samples: usize,
        skipped: usize,
        max_abs_err: f64,
        max_rel_err: f64,
        tol: f64,
    ) -> Self {
        let skips_ok = skipped * MAX_SKIP_DEN <= samples * MAX_SKIP_NUM;
        Self {
            name: name.to_string(),
            samples,
            skipped,
            max_abs_err,
            max_rel_err,
            tol,
            pass: max_rel_err <= tol && skips_ok,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: Vec<CaseReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvReport {
    pub seed: u64,
    pub eps: f64,
    pub stencil: String,
    pub rk4_steps: u32,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suites: Vec<SuiteReport>,
    pub env: EnvReport,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed())
    }

    /// Canonical serialization: pretty-printed, fixed key order, one
    /// trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One human-readable line per case, for terminal use.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for suite in &self.suites {
            for case in &suite.cases {
                let status = if case.pass { "pass" } else { "FAIL" };
                out.push_str(&format!(
                    "{status}  {}/{}  rel {:.3e} (tol {:.1e}), skipped {}/{}\n",
                    suite.name, case.name, case.max_rel_err, case.tol, case.skipped, case.samples
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_requires_tolerance_and_skip_budget() {
        let ok = CaseReport::build("c", 50, 10, 1e-7, 1e-7, 1e-5);
        assert!(ok.pass);
        let too_loose = CaseReport::build("c", 50, 0, 1e-3, 1e-3, 1e-5);
        assert!(!too_loose.pass);
        let too_many_skips = CaseReport::build("c", 50, 11, 1e-7, 1e-7, 1e-5);
        assert!(!too_many_skips.pass);
    }

    #[test]
    fn json_layout_is_stable() {
        let report = Report {
            suites: vec![SuiteReport {
                name: "division".into(),
                cases: vec![CaseReport::build("inverse", 2, 0, 0.0, 0.0, 1e-12)],
            }],
            env: EnvReport {
                seed: 42,
                eps: 1e-3,
                stencil: "central4".into(),
                rk4_steps: 32,
                version: "0.0.0".into(),
            },
        };
        let a = report.to_json();
        let b = report.to_json();
        assert_eq!(a, b);
        let suites_at = a.find("\"suites\"").expect("suites key");
        let env_at = a.find("\"env\"").expect("env key");
        assert!(suites_at < env_at, "suites precede env");
        assert!(a.ends_with('\n'));
    }
}
