//! Typed wire model for backend, job and result documents.

pub mod config;
pub mod defaults;
pub mod hex;
pub mod instruction;
pub mod parse;
pub mod properties;
pub mod qobj;
pub mod result;
pub mod validate;

pub use config::{BackendConfiguration, Channel, ChannelKind, GateConfig, HamiltonianDict, PulseConfigFields, UChannelTerm};
pub use defaults::{CmdDefEntry, PulseDefaults, PulseLibEntry};
pub use hex::{decode_hex, encode_hex};
pub use instruction::{Instruction, KernelSpec, ParamValue};
pub use parse::{json_eq, Mode, ParseError, Parsed};
pub use properties::{BackendProperties, BackendStatus, GateProp, GeneralParameters, Nduv};
pub use qobj::{Experiment, MeasReturn, Qobj, QobjType, UserConfig};
pub use result::{ComplexArray, ExpData, ExperimentResult, JobState, JobStatus, MemoryData, ResultDocument, Shots};
pub use validate::{Severity, ValidationReport, Violation};

use serde_json::Value;

/// Parses a Qobj and enforces the job-level required config keys.
pub fn parse_qobj_value(v: Value, mode: Mode) -> Result<Parsed<Qobj>, ParseError> {
    let q: Parsed<Qobj> = parse::parse_doc(v, mode)?;
    for key in ["shots", "memory_slots"] {
        let missing = match key {
            "shots" => q.config.shots.is_none(),
            _ => q.config.memory_slots.is_none(),
        };
        if missing {
            return Err(ParseError {
                pointer: "/config".into(),
                message: format!("missing field `{key}`"),
            });
        }
    }
    Ok(q)
}

pub fn parse_qobj(bytes: &[u8], mode: Mode) -> Result<Parsed<Qobj>, ParseError> {
    parse_qobj_value(parse::parse_json(bytes)?, mode)
}

pub fn parse_hamiltonian_dict(v: Value) -> Result<HamiltonianDict, ParseError> {
    parse::from_value(v)
}

/// Serializes any model document to compact JSON.
pub fn to_json<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("model types serialize")
}

pub fn to_json_pretty<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("model types serialize")
}
