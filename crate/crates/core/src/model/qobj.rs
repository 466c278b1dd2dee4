use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::defaults::PulseLibEntry;
use super::instruction::Instruction;

pub type Header = Map<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QobjType {
    #[serde(rename = "QASM")]
    Qasm,
    #[serde(rename = "PULSE")]
    Pulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasReturn {
    Single,
    Avg,
}

/// Simulator-only bit-flip channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitFlip {
    pub probability: f64,
    /// Qubits exposed to the channel; all qubits when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
    /// Instruction indices after which the channel acts. When absent it acts
    /// after every gate that touches an exposed qubit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after_instructions: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UserConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_slots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_credits: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas_level: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse_library: Option<Vec<PulseLibEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_slot_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas_return: Option<MeasReturn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_lo_freq: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas_lo_freq: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep_time: Option<f64>,
    /// Return per-shot memory alongside counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statevector: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit_flip: Option<BitFlip>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        UserConfig { $($f: $top.$f.clone().or_else(|| $base.$f.clone())),* }
    };
}

impl UserConfig {
    /// Experiment-level settings override job-level ones key by key.
    pub fn merged(&self, over: Option<&UserConfig>) -> UserConfig {
        let Some(o) = over else { return self.clone() };
        overlay!(
            self, o, shots, memory_slots, seed, max_credits, meas_level, pulse_library,
            memory_slot_size, meas_return, qubit_lo_freq, meas_lo_freq, rep_time, memory,
            statevector, unitary, bit_flip
        )
    }

    pub fn shots(&self) -> u64 {
        self.shots.unwrap_or(1)
    }

    pub fn memory_slots(&self) -> usize {
        self.memory_slots.unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<Header>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<UserConfig>,
    pub instructions: Vec<Instruction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qobj {
    pub qobj_id: String,
    #[serde(rename = "type")]
    pub kind: QobjType,
    pub schema_version: String,
    pub experiments: Vec<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<Header>,
    pub config: UserConfig,
}

impl Qobj {
    pub fn experiment_config(&self, i: usize) -> UserConfig {
        self.config.merged(self.experiments[i].config.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_prefers_experiment() {
        let job = UserConfig {
            shots: Some(100),
            memory_slots: Some(2),
            seed: Some(7),
            ..Default::default()
        };
        let exp = UserConfig {
            shots: Some(5),
            ..Default::default()
        };
        let m = job.merged(Some(&exp));
        assert_eq!(m.shots, Some(5));
        assert_eq!(m.memory_slots, Some(2));
        assert_eq!(m.seed, Some(7));
        assert_eq!(job.merged(None), job);
    }
}
