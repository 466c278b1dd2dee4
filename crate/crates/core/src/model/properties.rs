use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nduv {
    pub name: String,
    pub date: String,
    pub unit: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateProp {
    pub qubits: Vec<usize>,
    pub gate: String,
    pub parameters: Vec<Nduv>,
}

/// Standalone list of device-wide parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralParameters {
    pub general_parameters: Vec<Nduv>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendProperties {
    pub backend_name: String,
    pub backend_version: String,
    pub last_update_date: String,
    pub gates: Vec<GateProp>,
    pub qubits: Vec<Vec<Nduv>>,
    pub general: Vec<Nduv>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendStatus {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend_version: Option<String>,
    pub operational: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending_jobs: Option<u64>,
    pub status_msg: String,
}

/// Parses the date forms used on the wire: RFC 3339 plus the
/// space-separated variant (`2018-04-02 15:00:00Z`).
pub fn parse_iso8601(s: &str) -> Option<chrono::DateTime<chrono::FixedOffset>> {
    if let Ok(d) = chrono::DateTime::parse_from_rfc3339(s) {
        return Some(d);
    }
    let t = s.replacen(' ', "T", 1);
    if let Ok(d) = chrono::DateTime::parse_from_rfc3339(&t) {
        return Some(d);
    }
    chrono::NaiveDateTime::parse_from_str(&t, "%Y-%m-%dT%H:%M:%S")
        .ok()
        .map(|n| n.and_utc().fixed_offset())
}
