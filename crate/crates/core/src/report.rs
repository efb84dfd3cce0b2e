//! Structured check results.

use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub module: String,
    pub check: String,
    /// The identity or bound being checked.
    pub anchor: String,
    /// First 16 hex digits of SHA-256 over the input description.
    pub inputs_digest: String,
    pub pass: bool,
    pub max_error: f64,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

pub fn digest(inputs: &str) -> String {
    hex::encode(&Sha256::digest(inputs.as_bytes())[..8])
}

impl VerificationReport {
    pub fn new(module: &str, check: &str, anchor: &str, inputs: &str) -> Self {
        Self {
            module: module.into(),
            check: check.into(),
            anchor: anchor.into(),
            inputs_digest: digest(inputs),
            pass: false,
            max_error: 0.0,
            detail: String::new(),
            runtime_ms: None,
        }
    }

    pub fn outcome(mut self, pass: bool, max_error: f64, detail: impl Into<String>) -> Self {
        self.pass = pass;
        self.max_error = max_error;
        self.detail = detail.into();
        self
    }

    pub fn timed(mut self, d: Duration, keep: bool) -> Self {
        if keep {
            self.runtime_ms = Some(d.as_secs_f64() * 1e3);
        }
        self
    }
}

pub fn to_json(reports: &[VerificationReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

pub fn to_csv(reports: &[VerificationReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["module", "check", "anchor", "inputs_digest", "pass", "max_error", "detail", "runtime_ms"])
        .unwrap();
    for r in reports {
        w.write_record([
            r.module.as_str(),
            &r.check,
            &r.anchor,
            &r.inputs_digest,
            if r.pass { "true" } else { "false" },
            &format!("{:e}", r.max_error),
            &r.detail,
            &r.runtime_ms.map(|t| format!("{t:.1}")).unwrap_or_default(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}
