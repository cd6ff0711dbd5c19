use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Process exit codes.
pub const EXIT_DEFINITE: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    Stuck,
    Yes,
    No,
    Unknown,
    Agree,
    Mismatch,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Unknown => EXIT_UNKNOWN,
            Status::Mismatch => EXIT_MISMATCH,
            _ => EXIT_DEFINITE,
        }
    }
}

/// Everything one command produced. Reports replay: running `argv` again
/// gives the same report up to `wall_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub argv: Vec<String>,
    pub inputs: BTreeMap<String, String>,
    pub status: Status,
    /// One-line human summary.
    pub summary: String,
    pub result: Value,
    pub fuel: u64,
    pub bounds: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<String>>,
    pub wall_ms: f64,
}

impl Report {
    pub fn new(command: &str, status: Status, summary: impl Into<String>) -> Report {
        Report {
            command: command.to_string(),
            argv: Vec::new(),
            inputs: BTreeMap::new(),
            status,
            summary: summary.into(),
            result: Value::Null,
            fuel: 0,
            bounds: Value::Null,
            trace: None,
            wall_ms: 0.0,
        }
    }

    pub fn input(mut self, key: &str, value: impl ToString) -> Report {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn result(mut self, value: impl Serialize) -> Report {
        self.result = serde_json::to_value(value).unwrap_or(Value::Null);
        self
    }

    /// Equal apart from timing.
    pub fn same_run(&self, other: &Report) -> bool {
        let strip = |r: &Report| Report {
            wall_ms: 0.0,
            ..r.clone()
        };
        strip(self) == strip(other)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("{:?} {}\n", self.status, self.summary);
        if let Some(trace) = &self.trace {
            for line in trace {
                out.push_str("  ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }
}
