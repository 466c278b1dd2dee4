use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::instruction::{Instruction, KernelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseLibEntry {
    pub name: String,
    pub samples: Vec<Complex64>,
}

/// One gate (or measure) expressed as a pulse sequence.
///
/// Listings spell the sequence key both `sequence` and `instructions`; the
/// spelling used on input is the one written back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmdDefEntry {
    pub name: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<Instruction>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instructions: Option<Vec<Instruction>>,
}

impl CmdDefEntry {
    pub fn commands(&self) -> &[Instruction] {
        self.sequence
            .as_deref()
            .or(self.instructions.as_deref())
            .unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseDefaults {
    pub qubit_freq_est: Vec<f64>,
    pub meas_freq_est: Vec<f64>,
    pub buffer: u64,
    pub pulse_library: Vec<PulseLibEntry>,
    pub cmd_def: Vec<CmdDefEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas_kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discriminator: Option<KernelSpec>,
}

impl PulseDefaults {
    pub fn cmd(&self, name: &str, qubits: &[usize]) -> Option<&CmdDefEntry> {
        self.cmd_def
            .iter()
            .find(|c| c.name == name && c.qubits == qubits)
    }
}
