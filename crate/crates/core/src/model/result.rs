use indexmap::IndexMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::qobj::{Header, MeasReturn};

/// Shot count, or an `[n1, n2]` window for chunked delivery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Shots {
    Count(u64),
    Window([u64; 2]),
}

/// Nested complex data of rank 1 to 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexArray {
    D1(Vec<Complex64>),
    D2(Vec<Vec<Complex64>>),
    D3(Vec<Vec<Vec<Complex64>>>),
}

impl ComplexArray {
    pub fn shape(&self) -> Vec<usize> {
        match self {
            ComplexArray::D1(v) => vec![v.len()],
            ComplexArray::D2(v) => vec![v.len(), v.first().map_or(0, Vec::len)],
            ComplexArray::D3(v) => {
                let r = v.first();
                vec![
                    v.len(),
                    r.map_or(0, Vec::len),
                    r.and_then(|r| r.first()).map_or(0, Vec::len),
                ]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MemoryData {
    Hex(Vec<String>),
    Complex(ComplexArray),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<IndexMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<MemoryData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statevector: Option<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<Vec<Vec<Complex64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<Map<String, Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub shots: Shots,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<Header>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas_return: Option<MeasReturn>,
    pub data: ExpData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub backend_name: String,
    pub backend_version: String,
    pub qobj_id: String,
    pub job_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<Header>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    pub success: bool,
    pub results: Vec<ExperimentResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum JobState {
    Error,
    Queued,
    Initializing,
    Running,
    Cancelled,
    Done,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Error | JobState::Cancelled | JobState::Done)
    }

    pub fn can_move_to(self, next: JobState) -> bool {
        use JobState::*;
        matches!(
            (self, next),
            (Queued, Initializing)
                | (Queued, Cancelled)
                | (Initializing, Running)
                | (Initializing, Error)
                | (Running, Done)
                | (Running, Error)
                | (Running, Cancelled)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            JobState::Error => "ERROR",
            JobState::Queued => "QUEUED",
            JobState::Initializing => "INITIALIZING",
            JobState::Running => "RUNNING",
            JobState::Cancelled => "CANCELLED",
            JobState::Done => "DONE",
        }
    }

    pub fn parse(s: &str) -> Option<JobState> {
        serde_json::from_value(Value::String(s.to_string())).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub job_id: String,
    pub status: JobState,
    pub status_msg: String,
}
