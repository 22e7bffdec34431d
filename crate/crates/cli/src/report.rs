//! Run reports: one line per check, serialized as JSON and as text.

use serde::Serialize;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Counts toward the exit status.
    Check,
    /// Reported only.
    Diagnostic,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub tolerance: f64,
    /// `value < tolerance`, or `value > tolerance` when `lower_bound` is set.
    pub pass: bool,
    pub lower_bound: bool,
}

impl CheckResult {
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            kind: CheckKind::Check,
            value,
            tolerance,
            pass: value < tolerance,
            lower_bound: false,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckResult { pass: value > tolerance, lower_bound: true, ..Self::below(name, value, tolerance) }
    }

    pub fn diagnostic(name: impl Into<String>, value: f64) -> Self {
        CheckResult {
            name: name.into(),
            kind: CheckKind::Diagnostic,
            value,
            tolerance: f64::NAN,
            pass: true,
            lower_bound: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    pub config: crate::config::ScenarioConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub provenance: Provenance,
    pub checks: Vec<CheckResult>,
    /// Free-form findings, such as the winning continuity variant.
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn new(provenance: Provenance) -> Self {
        RunReport { provenance, checks: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.kind == CheckKind::Check).all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.kind == CheckKind::Check && !c.pass)
    }

    pub fn merge(&mut self, other: RunReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} (version {}, seed {})", self.provenance.command, self.provenance.version, self.provenance.seed);
        for c in &self.checks {
            let status = match (c.kind, c.pass) {
                (CheckKind::Diagnostic, _) => "INFO",
                (_, true) => "PASS",
                (_, false) => "FAIL",
            };
            let cmp = if c.lower_bound { ">" } else { "<" };
            if c.kind == CheckKind::Diagnostic {
                let _ = writeln!(s, "{status} {:<64} {:.3e}", c.name, c.value);
            } else {
                let _ = writeln!(s, "{status} {:<64} {:.3e} {cmp} {:.0e}", c.name, c.value, c.tolerance);
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let total = self.checks.iter().filter(|c| c.kind == CheckKind::Check).count();
        let failed = self.failures().count();
        let _ = writeln!(s, "{} of {total} checks passed", total - failed);
        s
    }
}
