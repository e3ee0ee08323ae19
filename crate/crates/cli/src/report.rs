//! JSON-lines task reports.
//!
//! One object per task, in task order, on stdout. Field order is fixed by
//! the struct; maps are sorted, so identical scenarios and flags produce
//! byte-identical output.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct TaskReport {
    pub task: usize,
    #[serde(rename = "type")]
    pub kind: String,
    pub inputs_digest: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub result: Value,
}

/// What a finished task means for the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// A solver finished without reaching its tolerances (exit 4).
    NotConverged,
    /// An asserted inequality or theorem check failed (exit 5).
    AssertionFailed,
    /// Construction or evaluation error (exit 3).
    Error,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Error => 3,
            Outcome::NotConverged => 4,
            Outcome::AssertionFailed => 5,
        }
    }
}

/// Combine outcomes with precedence error > non-convergence > assertion.
pub fn worst(a: Outcome, b: Outcome) -> Outcome {
    let rank = |o: Outcome| match o {
        Outcome::Error => 3,
        Outcome::NotConverged => 2,
        Outcome::AssertionFailed => 1,
        Outcome::Ok => 0,
    };
    if rank(a) >= rank(b) {
        a
    } else {
        b
    }
}

pub fn digest_of(value: &impl Serialize) -> String {
    let canonical = serde_json::to_vec(value).expect("digest serialization");
    let mut hasher = Sha256::new();
    hasher.update(&canonical);
    format!("sha256:{:x}", hasher.finalize())
}
