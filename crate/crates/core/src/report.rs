//! Structured verification records, serialized as JSON or CSV.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: &str = "triadne/1";

/// One comparison inside a report.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub label: String,
    /// Short name of the statement being tested.
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Hard checks decide the report outcome; soft ones are informational.
    pub hard: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub schema: String,
    pub name: String,
    pub inputs: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub data: Value,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>, inputs: Value) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            name: name.into(),
            inputs,
            checks: Vec::new(),
            pass: true,
            data: Value::Null,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, label: &str, anchor: &str, lhs: f64, rhs: f64, tolerance: f64, pass: bool, hard: bool) -> &mut Check {
        if hard && !pass {
            self.pass = false;
        }
        self.checks.push(Check {
            label: label.to_string(),
            anchor: anchor.to_string(),
            lhs,
            rhs,
            tolerance,
            pass,
            hard,
            note: None,
        });
        self.checks.last_mut().unwrap()
    }

    /// A check that decides the report outcome.
    pub fn hard(&mut self, label: &str, anchor: &str, lhs: f64, rhs: f64, tolerance: f64, pass: bool) -> &mut Check {
        self.push(label, anchor, lhs, rhs, tolerance, pass, true)
    }

    /// A recorded comparison that never fails the report.
    pub fn soft(&mut self, label: &str, anchor: &str, lhs: f64, rhs: f64, tolerance: f64, pass: bool) -> &mut Check {
        self.push(label, anchor, lhs, rhs, tolerance, pass, false)
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.pass &= other.pass;
        self.checks.extend(other.checks);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per check, with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("report,label,anchor,lhs,rhs,tolerance,pass,hard\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{:e},{},{}\n",
                csv_field(&self.name),
                csv_field(&c.label),
                csv_field(&c.anchor),
                c.lhs,
                c.rhs,
                c.tolerance,
                c.pass,
                c.hard
            ));
        }
        out
    }
}

impl Check {
    pub fn with_note(&mut self, note: impl Into<String>) -> &mut Self {
        self.note = Some(note.into());
        self
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_follows_hard_checks() {
        let mut r = VerificationReport::new("demo", serde_json::json!({"q": 3}));
        r.soft("trend", "x", 1.0, 0.0, 0.0, false);
        assert!(r.pass);
        r.hard("bound", "y", 1.0, 2.0, 0.0, true).with_note("fine");
        assert!(r.pass);
        r.hard("bound", "y", 3.0, 2.0, 0.0, false);
        assert!(!r.pass);
        let back: VerificationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.schema, SCHEMA);
        assert_eq!(r.to_csv().lines().count(), 4);
    }
}
