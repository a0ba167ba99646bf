//! Report envelope shared by every command and both pipelines.

use serde::Serialize;

pub const SCHEMA_ID: &str = "pshdef-report/v1";

/// The committed JSON schema for [`Report`].
pub const SCHEMA: &str = include_str!("../report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Certified,
    Obstructed,
    Exhausted,
    Pass,
    Fail,
    Unknown,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Certified | Status::Pass => 0,
            Status::Obstructed | Status::Fail => 1,
            Status::Exhausted | Status::Unknown => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Complex,
    Real,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub schema: &'static str,
    pub command: &'static str,
    pub mode: Mode,
    /// Canonical text of the defining function.
    pub input: String,
    pub status: Status,
    pub exit_code: i32,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &'static str, mode: Mode, input: String, status: Status, result: T) -> Self {
        Report { schema: SCHEMA_ID, command, mode, input, status, exit_code: status.exit_code(), result }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Result payload for a run that stopped with an error instead of a verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub error: String,
    pub witness: Option<Vec<f64>>,
}
