//! The JSON exit report of a guest run.

use kernel::{Kernel, TraceEntry};
use serde::Serialize;

/// One obligation as seen at the end of a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObligationReport {
    pub id: u64,
    pub challenge_text: String,
    pub discharged: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExitReport {
    /// `main`'s result, `-1` on a trap, `-2` when the image fails to load.
    pub status: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub trace: Vec<TraceEntry>,
    pub obligations: Vec<ObligationReport>,
}

pub const STATUS_TRAP: i32 = -1;
pub const STATUS_LINK: i32 = -2;

impl ExitReport {
    pub fn new(status: i32, error: Option<String>, kernel: &Kernel) -> Self {
        ExitReport {
            status,
            error,
            trace: kernel.trace().to_vec(),
            obligations: obligations(kernel),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn obligations(kernel: &Kernel) -> Vec<ObligationReport> {
    kernel
        .policy()
        .obligations()
        .map(|ob| ObligationReport {
            id: ob.id,
            challenge_text: kernel
                .heaps()
                .print_term(ob.challenge)
                .unwrap_or_else(|e| format!("<{e}>")),
            discharged: ob.discharged,
        })
        .collect()
}
