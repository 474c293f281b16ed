//! The report envelope shared by every subcommand, and its two renderings.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

/// Bumped whenever a top-level field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A budget truncated a sweep and nothing failed in the part that ran.
    Partial,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::Partial => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }

    pub fn from_outcome(failed: bool, exhaustive: bool) -> Self {
        if failed {
            Status::Fail
        } else if !exhaustive {
            Status::Partial
        } else {
            Status::Pass
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub seed: Option<u64>,
    pub caps: BTreeMap<String, u64>,
    /// Seconds since the Unix epoch; absent under `--no-timestamp`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub group: String,
    pub parameters: BTreeMap<String, String>,
    pub result: Value,
    pub status: Status,
    pub provenance: Provenance,
}

impl Report {
    pub fn new(command: impl Into<String>, group: impl Into<String>, timestamp: bool) -> Self {
        Report {
            command: command.into(),
            group: group.into(),
            parameters: BTreeMap::new(),
            result: Value::Null,
            status: Status::Pass,
            provenance: Provenance {
                tool: "zerosum",
                version: env!("CARGO_PKG_VERSION"),
                schema: SCHEMA_VERSION,
                seed: None,
                caps: BTreeMap::new(),
                timestamp: timestamp
                    .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)),
            },
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn cap(&mut self, key: &str, value: u64) -> &mut Self {
        self.provenance.caps.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Aligned `key  value` lines; nested results are flattened to dotted paths.
    pub fn to_table(&self) -> String {
        let mut rows = vec![
            ("command".to_string(), self.command.clone()),
            ("group".to_string(), self.group.clone()),
            ("status".to_string(), serde_json::to_value(self.status).unwrap().as_str().unwrap().to_string()),
        ];
        for (k, v) in &self.parameters {
            rows.push((format!("param.{k}"), v.clone()));
        }
        flatten("result", &self.result, &mut rows);
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<width$}  {v}\n"));
        }
        out
    }
}

const LIST_LIMIT: usize = 40;

fn flatten(path: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                flatten(&format!("{path}.{k}"), v, rows);
            }
        }
        Value::Array(items) if items.iter().all(|v| !v.is_object() && !v.is_array()) => {
            let shown: Vec<String> = items.iter().take(LIST_LIMIT).map(scalar).collect();
            let more = items.len().saturating_sub(LIST_LIMIT);
            let tail = if more > 0 { format!(" ... ({more} more)") } else { String::new() };
            rows.push((path.to_string(), format!("[{}]{tail}", shown.join(", "))));
        }
        Value::Array(items) => {
            for (i, v) in items.iter().take(LIST_LIMIT).enumerate() {
                flatten(&format!("{path}[{i}]"), v, rows);
            }
            if items.len() > LIST_LIMIT {
                rows.push((format!("{path}[..]"), format!("{} more", items.len() - LIST_LIMIT)));
            }
        }
        other => rows.push((path.to_string(), scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}
