//! Structured verification results shared by every suite.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// `None` when the measured quantity is not a finite number.
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub notes: String,
}

/// `{suite, timestamp, seed, checks}`. The timestamp is supplied by the
/// caller (Unix seconds) so that identical runs serialise identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub timestamp: u64,
    pub seed: u64,
    pub checks: Vec<Check>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Report {
    pub fn new(suite: impl Into<String>, seed: u64) -> Self {
        Report {
            suite: suite.into(),
            timestamp: 0,
            seed,
            checks: Vec::new(),
        }
    }

    pub fn with_timestamp(mut self, timestamp: u64) -> Self {
        self.timestamp = timestamp;
        self
    }

    /// Pass iff `residual <= tolerance`.
    pub fn check_le(
        &mut self,
        name: impl Into<String>,
        residual: f64,
        tolerance: f64,
        notes: impl Into<String>,
    ) -> bool {
        let pass = residual <= tolerance;
        self.checks.push(Check {
            name: name.into(),
            pass,
            residual: finite(residual),
            tolerance: finite(tolerance),
            notes: notes.into(),
        });
        pass
    }

    /// Pass iff `value > threshold`.
    pub fn check_gt(
        &mut self,
        name: impl Into<String>,
        value: f64,
        threshold: f64,
        notes: impl Into<String>,
    ) -> bool {
        let pass = value > threshold;
        self.checks.push(Check {
            name: name.into(),
            pass,
            residual: finite(value),
            tolerance: finite(threshold),
            notes: notes.into(),
        });
        pass
    }

    pub fn check_bool(&mut self, name: impl Into<String>, pass: bool, notes: impl Into<String>) -> bool {
        self.checks.push(Check {
            name: name.into(),
            pass,
            residual: None,
            tolerance: None,
            notes: notes.into(),
        });
        pass
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter_map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialise")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
