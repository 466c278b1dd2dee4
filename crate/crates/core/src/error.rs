use thiserror::Error;

use crate::hamiltonian::DslError;
use crate::lowering::LoweringError;
use crate::qasm::gates::GateError;

/// Failures raised while executing an experiment.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("job cancelled")]
    Cancelled,
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Hamiltonian(#[from] DslError),
    #[error(transparent)]
    Lowering(#[from] LoweringError),
    #[error("instruction {index}: conditional operations are not supported")]
    ConditionalUnsupported { index: usize },
    #[error("instruction {index}: register {register} out of range")]
    RegisterOutOfRange { index: usize, register: usize },
    #[error("instruction {index}: {name:?} cannot be part of a unitary")]
    NonUnitaryInstruction { index: usize, name: String },
    #[error("{qubits} qubits exceeds the simulator limit of {limit}")]
    TooManyQubits { qubits: usize, limit: usize },
    #[error("instruction {index}: pulse on {channel} overlaps the previous pulse")]
    OverlappingPulses { index: usize, channel: String },
    #[error("instruction {index}: pulse {name:?} not found")]
    UnknownPulseName { index: usize, name: String },
    #[error("instruction {index}: t0 is earlier than a preceding command")]
    NonMonotoneT0 { index: usize },
    #[error("instruction {index}: bad channel {channel:?}")]
    BadChannel { index: usize, channel: String },
    #[error("channel {0} drives a nonlinear term")]
    NonlinearDriveUnsupported(String),
    #[error("kernel {0:?} is not implemented")]
    KernelUnknown(String),
    #[error("discriminator {0:?} is not implemented")]
    DiscriminatorUnknown(String),
    #[error("instruction {index}: register writes require meas_level 2")]
    RegisterWriteWithoutLevel2 { index: usize },
    #[error("result shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("backend has no Hamiltonian model")]
    NoHamiltonian,
    #[error("{0}")]
    Invalid(String),
}
