//! Versioned report envelopes with deterministic byte output. Every run
//! emits one envelope embedding the tool version, schema version, a hash of
//! the exact config text, the seed and budget in force, and the task
//! payload. Identical (config, version) pairs must produce byte-identical
//! reports, so all serialization here is canonical: JSON object keys are
//! sorted (serde_json's default map is ordered) and output ends in exactly
//! one newline.

use serde::Serialize;
use serde_json::Value;

use crate::{SCHEMA_VERSION, TOOL_VERSION};

#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub tool_version: &'static str,
    pub schema_version: u32,
    pub task: String,
    /// FNV-1a 64-bit hash of the exact config text, hex-encoded.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
    pub payload: Value,
}

impl ReportEnvelope {
    pub fn new(
        task: &str,
        config_text: &str,
        seed: Option<u64>,
        budget: Option<u64>,
        payload: Value,
    ) -> Self {
        ReportEnvelope {
            tool_version: TOOL_VERSION,
            schema_version: SCHEMA_VERSION,
            task: task.to_string(),
            config_hash: config_hash(config_text),
            seed,
            budget,
            payload,
        }
    }

    /// Canonical JSON bytes: pretty-printed, sorted maps, trailing newline.
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s.into_bytes()
    }

    /// Canonical CSV bytes: one `path,value` row per leaf of the envelope,
    /// rows in path order, RFC-4180 quoting where needed.
    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let value = serde_json::to_value(self).expect("report serialization");
        let mut rows = vec![("key".to_string(), "value".to_string())];
        flatten_into("", &value, &mut rows);
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&csv_field(&k));
            out.push(',');
            out.push_str(&csv_field(&v));
            out.push('\n');
        }
        out.into_bytes()
    }
}

/// Serializes any payload to a JSON value for embedding in an envelope.
pub fn payload<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("payload serialization")
}

/// FNV-1a 64-bit, hex. Stable across platforms and runs; used to tie a
/// report to the exact config text that produced it.
pub fn config_hash(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn flatten_into(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            if map.is_empty() {
                rows.push((prefix.to_string(), "{}".to_string()));
            }
            for (k, v) in map {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_into(&path, v, rows);
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                rows.push((prefix.to_string(), "[]".to_string()));
            }
            for (i, v) in items.iter().enumerate() {
                flatten_into(&format!("{prefix}[{i}]"), v, rows);
            }
        }
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        Value::Number(n) => rows.push((prefix.to_string(), n.to_string())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
