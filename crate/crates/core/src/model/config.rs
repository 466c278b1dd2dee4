use indexmap::IndexMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub name: String,
    pub parameters: Vec<String>,
    pub coupling_map: Vec<Vec<usize>>,
    pub qasm_def: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_map: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianDict {
    pub h_latex: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_str: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<IndexMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub osc: Option<IndexMap<String, f64>>,
}

impl HamiltonianDict {
    pub fn terms(&self) -> &[String] {
        self.h_str.as_deref().unwrap_or(&[])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UChannelTerm {
    pub q: usize,
    pub scale: Complex64,
}

/// Fields present on OpenPulse-capable backends.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseConfigFields {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_uchannels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianDict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_channel_lo: Option<Vec<Vec<UChannelTerm>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas_levels: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_lo_range: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas_lo_range: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dtm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas_map: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_bandwidth: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas_kernels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discriminators: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acquisition_latency: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional_latency: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfiguration {
    pub backend_name: String,
    pub backend_version: String,
    pub n_qubits: i64,
    pub basis_gates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_map: Option<Vec<[usize; 2]>>,
    pub gates: Vec<GateConfig>,
    pub local: bool,
    pub simulator: bool,
    pub conditional: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configurable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_registers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub register_map: Option<Vec<Vec<u8>>>,
    pub open_pulse: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub online_date: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tags: Option<Vec<String>>,
    #[serde(flatten)]
    pub pulse: PulseConfigFields,
}

impl BackendConfiguration {
    pub fn gate(&self, name: &str) -> Option<&GateConfig> {
        self.gates.iter().find(|g| g.name == name)
    }

    pub fn n_registers(&self) -> usize {
        self.n_registers.unwrap_or(0)
    }

    pub fn n_uchannels(&self) -> usize {
        self.pulse.n_uchannels.unwrap_or(0)
    }

    pub fn meas_levels(&self) -> &[u8] {
        self.pulse.meas_levels.as_deref().unwrap_or(&[])
    }

    /// Whether `reg` may receive a measurement of `qubit`.
    pub fn register_allowed(&self, qubit: usize, reg: usize) -> bool {
        match &self.register_map {
            Some(m) => m
                .get(qubit)
                .and_then(|row| row.get(reg))
                .is_some_and(|&b| b == 1),
            None => reg < self.n_registers(),
        }
    }
}

/// Channel kinds addressable by pulse commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelKind {
    Drive,
    Measure,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel {
    pub kind: ChannelKind,
    pub index: usize,
}

impl Channel {
    pub fn parse(s: &str) -> Option<Channel> {
        let mut chars = s.chars();
        let kind = match chars.next()? {
            'd' | 'D' => ChannelKind::Drive,
            'm' | 'M' => ChannelKind::Measure,
            'u' | 'U' => ChannelKind::Control,
            _ => return None,
        };
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some(Channel {
            kind,
            index: digits.parse().ok()?,
        })
    }

    pub fn drive(q: usize) -> Channel {
        Channel {
            kind: ChannelKind::Drive,
            index: q,
        }
    }

    pub fn measure(q: usize) -> Channel {
        Channel {
            kind: ChannelKind::Measure,
            index: q,
        }
    }

    pub fn control(u: usize) -> Channel {
        Channel {
            kind: ChannelKind::Control,
            index: u,
        }
    }
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = match self.kind {
            ChannelKind::Drive => 'd',
            ChannelKind::Measure => 'm',
            ChannelKind::Control => 'u',
        };
        write!(f, "{c}{}", self.index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_ids() {
        assert_eq!(Channel::parse("d0"), Some(Channel::drive(0)));
        assert_eq!(Channel::parse("u12"), Some(Channel::control(12)));
        assert_eq!(Channel::parse("m3").unwrap().to_string(), "m3");
        assert_eq!(Channel::parse("x0"), None);
        assert_eq!(Channel::parse("d"), None);
        assert_eq!(Channel::parse("d-1"), None);
    }
}
