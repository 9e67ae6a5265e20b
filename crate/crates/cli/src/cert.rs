//! JSON certificates for classification results.

use jring_core::checker::{Bounds, ClassificationReport, SearchMode, SearchStats, TargetKind, Verdict, Witness};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub target: TargetKind,
    pub bounds: Bounds,
    pub mode: SearchMode,
}

/// A self-contained classification result: the ring expression is enough to
/// rebuild the ring and replay the witness. Unknown fields are ignored when
/// reading.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub ring_expr: String,
    pub ring_size: usize,
    pub command: String,
    pub parameters: Parameters,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub stats: SearchStats,
    pub tool_version: String,
}

impl Certificate {
    pub fn from_report(command: &str, report: &ClassificationReport) -> Self {
        Certificate {
            schema_version: SCHEMA_VERSION,
            ring_expr: report.ring_expr.clone(),
            ring_size: report.ring_size,
            command: command.to_string(),
            parameters: Parameters { target: report.target, bounds: report.bounds, mode: report.mode },
            verdict: report.verdict,
            witness: report.witness.clone(),
            stats: report.stats.clone(),
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn to_report(&self) -> ClassificationReport {
        ClassificationReport {
            ring_expr: self.ring_expr.clone(),
            ring_size: self.ring_size,
            target: self.parameters.target,
            bounds: self.parameters.bounds,
            mode: self.parameters.mode,
            verdict: self.verdict,
            witness: self.witness.clone(),
            stats: self.stats.clone(),
        }
    }
}
