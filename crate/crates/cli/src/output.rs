use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Refuted,
    Error,
}

/// What every command prints: a status, its result and a trace of the steps
/// taken. Refutations are successful computations.
#[derive(Clone, Debug, Serialize)]
pub struct CommandResult {
    pub status: Status,
    pub payload: Value,
    pub log: Vec<Value>,
}

/// Command output that bypasses the JSON envelope.
pub enum Output {
    Result(CommandResult),
    Text(String),
}

impl CommandResult {
    pub fn ok(payload: Value) -> Self {
        CommandResult {
            status: Status::Ok,
            payload,
            log: Vec::new(),
        }
    }

    pub fn verdict(passes: bool, payload: Value) -> Self {
        CommandResult {
            status: if passes { Status::Ok } else { Status::Refuted },
            payload,
            log: Vec::new(),
        }
    }

    pub fn with_log(mut self, entry: Value) -> Self {
        self.log.push(entry);
        self
    }

    /// Compact JSON with keys in sorted order.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("command results serialize");
        serde_json::to_string(&v).expect("values serialize")
    }

    /// `key: value` lines, one per payload field.
    pub fn to_human(&self) -> String {
        let status = serde_json::to_value(self.status).expect("status serializes");
        let mut out = format!("status: {}\n", status.as_str().unwrap_or_default());
        match &self.payload {
            Value::Object(m) => {
                for (k, v) in m {
                    out.push_str(&format!("{k}: {}\n", human_value(v)));
                }
            }
            v => out.push_str(&format!("{}\n", human_value(v))),
        }
        for entry in &self.log {
            out.push_str(&format!("log: {}\n", human_value(entry)));
        }
        out
    }
}

fn human_value(v: &Value) -> String {
    match v {
        Value::String(s) if s.is_empty() => "e".to_string(),
        Value::String(s) => s.clone(),
        v => v.to_string(),
    }
}
