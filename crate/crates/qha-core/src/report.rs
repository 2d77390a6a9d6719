//! Structured verification reports: each suite produces a list of named
//! checks with a measured value, a tolerance, and a pass flag that is
//! always derived from the two numbers — never set independently.
//!
//! Reports serialize to JSON (round-trippable) and to a flat CSV with one
//! entry per row.  `deterministic_json` zeroes the wall-clock field so two
//! runs with identical configuration emit bitwise-identical text.

use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One verified identity or measured constant.
///
/// The `pass` flag always equals `value.is_finite() && value <= tolerance`;
/// boolean checks encode success as a 0/1 value against tolerance 0.5, and
/// measured constants use the largest finite tolerance (JSON cannot carry
/// infinities) so that any finite value passes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportEntry {
    /// Short kebab-case identifier of the check.
    pub name: String,
    /// Measured defect, ratio, or constant.
    pub value: f64,
    /// Bound the value is held against (infinite for report-only values).
    pub tolerance: f64,
    /// Derived verdict.
    pub pass: bool,
    /// Provenance slug naming the identity under test, or `"plumbing"`
    /// for harness-level entries.
    pub paper_anchor: String,
}

impl ReportEntry {
    /// Entry holding a measured defect against an explicit bound.
    pub fn defect(name: &str, anchor: &str, value: f64, tolerance: f64) -> Self {
        ReportEntry {
            name: name.into(),
            value,
            tolerance,
            pass: value.is_finite() && value <= tolerance,
            paper_anchor: anchor.into(),
        }
    }

    /// Entry recording a measured constant; passes whenever finite.
    pub fn measured(name: &str, anchor: &str, value: f64) -> Self {
        Self::defect(name, anchor, value, f64::MAX)
    }

    /// Entry for a yes/no check, stored as a 0/1 value against 0.5.
    pub fn boolean(name: &str, anchor: &str, ok: bool) -> Self {
        Self::defect(name, anchor, if ok { 0.0 } else { 1.0 }, 0.5)
    }
}

/// Outcome of one verification suite.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NormReport {
    /// Suite identifier.
    pub suite: String,
    /// Echo of the configuration that produced the report.
    pub config: BTreeMap<String, String>,
    /// All checks, in execution order.
    pub entries: Vec<ReportEntry>,
    /// Wall-clock duration of the suite in seconds.
    pub wall_time_s: f64,
    /// Crate version that produced the report.
    pub version: String,
}

impl NormReport {
    /// Empty report for a suite.
    pub fn new(suite: &str) -> Self {
        NormReport {
            suite: suite.into(),
            config: BTreeMap::new(),
            entries: Vec::new(),
            wall_time_s: 0.0,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    /// Records a configuration key.
    pub fn set_config(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.into(), value.to_string());
    }

    /// Appends a check.
    pub fn push(&mut self, entry: ReportEntry) {
        self.entries.push(entry);
    }

    /// True when every entry passed.
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    /// Names of the failing entries.
    pub fn failures(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| !e.pass)
            .map(|e| e.name.as_str())
            .collect()
    }

    /// Pretty JSON, including the wall-clock time.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Pretty JSON with the wall-clock field zeroed, so identical
    /// configurations yield bitwise-identical output.
    pub fn deterministic_json(&self) -> String {
        let mut clone = self.clone();
        clone.wall_time_s = 0.0;
        clone.to_json()
    }

    /// Parses a report back from its JSON form.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| crate::error::QhaError::InvalidParameter(format!("bad report JSON: {e}")))
    }

    /// Flat CSV: a header line then one row per entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,tolerance,pass,paper_anchor\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.name, e.value, e.tolerance, e.pass, e.paper_anchor
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_is_derived_from_value_and_tolerance() {
        assert!(ReportEntry::defect("a", "x", 1e-13, 1e-12).pass);
        assert!(!ReportEntry::defect("b", "x", 2e-12, 1e-12).pass);
        assert!(!ReportEntry::defect("c", "x", f64::NAN, 1e-12).pass);
        assert!(!ReportEntry::measured("d", "x", f64::INFINITY).pass);
        assert!(ReportEntry::measured("e", "x", 42.0).pass);
        assert!(ReportEntry::boolean("f", "x", true).pass);
        assert!(!ReportEntry::boolean("g", "x", false).pass);
    }

    #[test]
    fn json_round_trip_is_structurally_equal() {
        let mut r = NormReport::new("demo");
        r.set_config("n", 8);
        r.push(ReportEntry::defect("check-one", "slug", 1e-14, 1e-12));
        r.push(ReportEntry::measured("constant", "plumbing", 3.5));
        r.wall_time_s = 1.25;
        let parsed = NormReport::from_json(&r.to_json()).unwrap();
        assert_eq!(r, parsed);
    }

    #[test]
    fn deterministic_json_ignores_wall_time() {
        let mut a = NormReport::new("demo");
        a.push(ReportEntry::defect("c", "x", 0.0, 1.0));
        let mut b = a.clone();
        a.wall_time_s = 0.7;
        b.wall_time_s = 9.9;
        assert_eq!(a.deterministic_json(), b.deterministic_json());
        assert_ne!(a.to_json(), b.to_json());
    }

    #[test]
    fn csv_has_header_plus_one_row_per_entry() {
        let mut r = NormReport::new("demo");
        assert_eq!(r.to_csv().lines().count(), 1);
        r.push(ReportEntry::defect("c1", "x", 0.0, 1.0));
        r.push(ReportEntry::defect("c2", "y", 2.0, 1.0));
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("name,value,tolerance,pass,paper_anchor"));
        assert!(!r.all_pass());
        assert_eq!(r.failures(), vec!["c2"]);
    }
}
