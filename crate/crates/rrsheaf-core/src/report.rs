//! Versioned JSON envelopes for batch runs.
//!
//! Everything here serializes deterministically: struct fields in
//! declaration order, map keys sorted (the default `serde_json` map is
//! ordered), and no timestamps inside the results body.  The one
//! wall-clock field lives on the envelope and is omitted entirely unless a
//! caller opts in, so that two runs of the same configuration produce
//! byte-identical output.

use serde::Serialize;
use serde_json::Value;

/// Top-level wrapper around a command's output.
#[derive(Clone, Debug, Serialize)]
pub struct ReportEnvelope {
    /// Report format version, bumped on breaking layout changes.
    pub schema: u32,
    /// Crate version that produced the report.
    pub version: String,
    /// Echo of the effective configuration.
    pub config: Value,
    pub results: Value,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl ReportEnvelope {
    pub fn new(config: Value, results: Value, pass: bool) -> ReportEnvelope {
        ReportEnvelope {
            schema: 1,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            results,
            pass,
            wall_time_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serialization cannot fail")
    }
}

/// Outcome of one verification check on one parameter cell.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub params: Value,
    pub expected: Value,
    pub got: Value,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Value>,
}

impl CheckResult {
    pub fn new(
        check: &str,
        params: Value,
        expected: Value,
        got: Value,
        pass: bool,
    ) -> CheckResult {
        CheckResult { check: check.to_string(), params, expected, got, pass, witnesses: None }
    }
}
