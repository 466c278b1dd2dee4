//! OpenPulse experiment execution.

pub mod engine;
pub mod measure;
pub mod propagate;
pub mod timeline;

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::hamiltonian::{EvaluatedHamiltonian, HamiltonianSpec, SubsystemLayout, DEFAULT_OSC_LEVELS};
use crate::model::BackendConfiguration;

pub use engine::{run_experiment, PulseContext};
pub use measure::{assemble_pulse_result, boxcar, discriminate_max_1q_fidelity, ShotRecord};
pub use propagate::Propagator;
pub use timeline::{build_timelines, ChannelLimits, ChannelTimeline};

/// Physical constants of an emulated device that the wire format does not carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmulatorParams {
    /// rad/ns of Rabi rate per unit drive amplitude.
    pub drive_scale: f64,
    /// Standard deviation of the IQ noise added to each acquired sample.
    pub iq_noise_sigma: f64,
    pub qubit_levels: usize,
    pub oscillator_levels: usize,
    /// Overrides the layout inferred from the Hamiltonian.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsystems: Option<SubsystemLayout>,
    /// Terms rotating faster than this (GHz) are dropped.
    pub rwa_cutoff_ghz: f64,
}

impl Default for EmulatorParams {
    fn default() -> Self {
        EmulatorParams {
            drive_scale: 1.0,
            iq_noise_sigma: 0.0,
            qubit_levels: 2,
            oscillator_levels: DEFAULT_OSC_LEVELS,
            subsystems: None,
            rwa_cutoff_ghz: 2.5,
        }
    }
}

/// Parses and evaluates a backend's Hamiltonian on the emulator's layout.
pub fn prepare_hamiltonian(cfg: &BackendConfiguration, params: &EmulatorParams) -> Result<EvaluatedHamiltonian, EngineError> {
    let dict = cfg.pulse.hamiltonian.as_ref().ok_or(EngineError::NoHamiltonian)?;
    let spec = HamiltonianSpec::from_dict(dict)?;
    let n = cfg.n_qubits.max(0) as usize;
    let layout = match &params.subsystems {
        Some(l) => l.clone(),
        None => spec.layout(n, params.qubit_levels, params.oscillator_levels)?,
    };
    Ok(spec.evaluate(&layout, n)?)
}
