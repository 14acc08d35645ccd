//! Machine-readable check reports with stable field names.

use serde::{Deserialize, Serialize};

use crate::bicat::CoherenceResult;
use crate::corr::{IsoReport, LawCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// Fields are declared in alphabetical order so the JSON keys come out sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub counterexample: Option<String>,
    pub details: String,
    pub status: Status,
}

impl Report {
    pub fn pass(check: impl Into<String>, details: impl Into<String>) -> Self {
        Report { check: check.into(), counterexample: None, details: details.into(), status: Status::Pass }
    }

    pub fn fail(check: impl Into<String>, details: impl Into<String>, counterexample: Option<String>) -> Self {
        Report { check: check.into(), counterexample, details: details.into(), status: Status::Fail }
    }

    pub fn skip(check: impl Into<String>, details: impl Into<String>) -> Self {
        Report { check: check.into(), counterexample: None, details: details.into(), status: Status::Skip }
    }

    pub fn from_law(check: impl Into<String>, law: &LawCheck) -> Self {
        if law.ok {
            Report::pass(check, "holds")
        } else {
            Report::fail(check, "violated", law.detail.clone())
        }
    }

    pub fn from_coherence(prefix: &str, c: &CoherenceResult) -> Self {
        let check = if prefix.is_empty() { c.name.clone() } else { format!("{prefix}: {}", c.name) };
        let mode = if c.exact { "exact" } else { "float witness" };
        if c.ok {
            Report::pass(check, format!("commutes ({mode})"))
        } else {
            Report::fail(check, format!("does not commute ({mode})"), c.counterexample.clone())
        }
    }

    /// One report per law of an isomorphism check.
    pub fn from_iso(prefix: &str, r: &IsoReport) -> Vec<Report> {
        [("left linear", &r.left_linear), ("right linear", &r.right_linear), ("isometric", &r.isometric), ("surjective", &r.surjective)]
            .into_iter()
            .map(|(name, law)| Report::from_law(format!("{prefix}: {name}"), law))
            .collect()
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Canonical order: by check name, ties kept in insertion order.
pub fn sort_reports(reports: &mut [Report]) {
    reports.sort_by(|a, b| a.check.cmp(&b.check));
}

pub fn all_passed(reports: &[Report]) -> bool {
    !reports.iter().any(Report::failed)
}

pub fn reports_to_json(reports: &[Report]) -> String {
    let mut sorted = reports.to_vec();
    sort_reports(&mut sorted);
    serde_json::to_string_pretty(&sorted).expect("reports serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_stable() {
        let r = vec![Report::fail("b", "x", Some("w".into())), Report::pass("a", "y")];
        let s = reports_to_json(&r);
        let a = s.find("\"a\"").unwrap();
        let b = s.find("\"b\"").unwrap();
        assert!(a < b);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        let keys: Vec<&String> = v[0].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["check", "counterexample", "details", "status"]);
        assert_eq!(v[1]["status"], "fail");
        assert!(!all_passed(&r));
    }
}
