//! Run reports: everything a command computed, each check as a named
//! verdict with its residual and threshold. Serialization is plain
//! serde_json (shortest round-trip floats, ordered maps), so identical
//! inputs produce byte-identical reports once timestamps are suppressed.

use kemeny_core::McEstimate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Verdict {
    /// Pass when value <= threshold.
    pub fn at_most(value: f64, threshold: f64) -> Verdict {
        Verdict { value, threshold, pass: value <= threshold }
    }

    /// Pass when value >= threshold.
    pub fn at_least(value: f64, threshold: f64) -> Verdict {
        Verdict { value, threshold, pass: value >= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSection {
    pub name: String,
    #[serde(flatten)]
    pub estimate: McEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model_kind: String,
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub results: serde_json::Value,
    pub mc: Vec<McSection>,
    pub verdicts: BTreeMap<String, Verdict>,
}

impl RunReport {
    pub fn new(model_kind: &str, input_digest: String) -> RunReport {
        RunReport {
            model_kind: model_kind.to_string(),
            input_digest,
            timestamp: None,
            parameters: BTreeMap::new(),
            results: serde_json::Value::Null,
            mc: Vec::new(),
            verdicts: BTreeMap::new(),
        }
    }

    pub fn set_parameter(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    pub fn add_verdict(&mut self, name: &str, verdict: Verdict) {
        self.verdicts.insert(name.to_string(), verdict);
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }

    pub fn render(&self, compact: bool) -> String {
        let mut s = if compact {
            serde_json::to_string(self).expect("report serializes")
        } else {
            serde_json::to_string_pretty(self).expect("report serializes")
        };
        s.push('\n');
        s
    }
}

/// Flatten a K profile to CSV for external plotting.
pub fn profile_csv(points: &[(String, f64)], label: &str) -> String {
    let mut out = String::from(label);
    out.push_str(",k\n");
    for (x, k) in points {
        out.push_str(&format!("{x},{k}\n"));
    }
    out
}
