//! The machine-readable verdict document and the exit-code contract.

use serde::Serialize;
use serde_json::{Map, Value};

/// Final status of a run. Maps onto the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Rigid,
    Flexible,
    Inconclusive,
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Rigid | Status::Pass => 0,
            Status::Error => 1,
            Status::Flexible | Status::Fail => 2,
            Status::Inconclusive => 3,
        }
    }
}

/// One verdict document, written to stdout as pretty JSON with stable
/// field order.
#[derive(Debug, Serialize)]
pub struct VerdictDocument {
    pub command: String,
    pub input_digest: String,
    pub parameters: Value,
    pub status: Status,
    pub reports: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<Map<String, Value>>,
}

impl VerdictDocument {
    pub fn error(err: &dyn std::fmt::Display) -> Self {
        Self {
            command: String::new(),
            input_digest: "none".into(),
            parameters: Value::Null,
            status: Status::Error,
            reports: serde_json::json!({ "error": err.to_string() }),
            timings_ms: None,
        }
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// FNV-1a 64-bit digest of the raw input bytes, hex encoded.
pub fn digest(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("fnv1a64:{hash:016x}")
}
