//! Report primitives shared by every family: claim verdicts, witnesses,
//! run-level reports, and the canonical JSON/CSV emitters.
//!
//! All numeric output is decimal text with 17 significant digits
//! (`{:.16e}`), which round-trips IEEE doubles exactly; JSON objects are
//! emitted with alphabetically ordered keys so serialized reports are
//! canonical and diff-able.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A point/value pair backing a verdict: where something was observed and
/// what the objective evaluated to there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub value: f64,
}

/// Verdict statuses. `Confirmed`/`Refuted` describe mathematical claims under
/// test; `Pass`/`Fail` describe the artifact's own checks (golden values,
/// identities, tolerance comparisons).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClaimStatus {
    #[serde(rename = "CONFIRMED")]
    Confirmed,
    #[serde(rename = "REFUTED")]
    Refuted,
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl std::fmt::Display for ClaimStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ClaimStatus::Confirmed => "CONFIRMED",
            ClaimStatus::Refuted => "REFUTED",
            ClaimStatus::Pass => "PASS",
            ClaimStatus::Fail => "FAIL",
        };
        f.write_str(s)
    }
}

/// One adjudicated claim, carrying the tolerance it was judged against plus
/// any named values and an optional witness point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimVerdict {
    pub claim_id: String,
    pub status: ClaimStatus,
    pub witness: Option<Witness>,
    pub values: BTreeMap<String, f64>,
    pub tolerance: f64,
}

impl ClaimVerdict {
    pub fn new(claim_id: impl Into<String>, status: ClaimStatus, tolerance: f64) -> Self {
        ClaimVerdict {
            claim_id: claim_id.into(),
            status,
            witness: None,
            values: BTreeMap::new(),
            tolerance,
        }
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }
}

/// Top-level report emitted by every CLI command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub input_digest: String,
    pub command: String,
    pub verdicts: Vec<ClaimVerdict>,
    pub timing_ms: u64,
}

impl RunReport {
    pub fn new(command: impl Into<String>, input_digest: impl Into<String>) -> Self {
        RunReport {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest: input_digest.into(),
            command: command.into(),
            verdicts: Vec::new(),
            timing_ms: 0,
        }
    }

    /// True when no verdict is `FAIL` — the exit-code-0 condition
    /// (`REFUTED` entries are claim outcomes, not tool failures).
    pub fn all_ok(&self) -> bool {
        self.verdicts
            .iter()
            .all(|v| v.status != ClaimStatus::Fail)
    }

    pub fn to_json(&self) -> String {
        to_json_17(self)
    }
}

/// Formats one double as decimal text with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes any serde value to canonical JSON: two-space indentation,
/// alphabetical object keys, floats printed with 17 significant digits,
/// integers printed as integers. Non-finite floats never appear in reports;
/// serde maps them to `null`.
pub fn to_json_17<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report serialization cannot fail");
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &serde_json::Value, indent: usize) {
    match v {
        serde_json::Value::Null => out.push_str("null"),
        serde_json::Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&format_f64(n.as_f64().unwrap()));
            }
        }
        serde_json::Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string escaping cannot fail"));
        }
        serde_json::Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent + 1));
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        serde_json::Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            // serde_json's default map is a BTreeMap, so iteration is already
            // in sorted (canonical) key order.
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("string escaping cannot fail"));
                out.push_str(": ");
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}

/// Hex SHA-256 of raw bytes; used as the platform-stable input digest.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
