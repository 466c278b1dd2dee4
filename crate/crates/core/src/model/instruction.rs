//! Experiment sequence commands for both QASM and PULSE experiments.
//!
//! The wire format discriminates on `name`: a fixed set of reserved names
//! select classical and pulse primitives, and anything else is either a
//! gate or a drive pulse depending on whether a `ch` key is present.

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::parse::nested_error;

pub const RESERVED_NAMES: &[&str] = &[
    "bfunc", "copy", "barrier", "reset", "measure", "snapshot", "fc", "pv", "acquire",
];

/// Names a pulse library entry may not take.
pub const RESERVED_PULSE_NAMES: &[&str] = &["fc", "pv", "acquire", "bfunc", "copy", "snapshot"];

/// `register` in bfunc is a scalar in the field table but a one-element list
/// in some listings; both spellings are kept as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegisterRef {
    One(usize),
    Many(Vec<usize>),
}

impl RegisterRef {
    pub fn slots(&self) -> &[usize] {
        match self {
            RegisterRef::One(r) => std::slice::from_ref(r),
            RegisterRef::Many(v) => v,
        }
    }

    /// The single register written, if unambiguous.
    pub fn single(&self) -> Option<usize> {
        match self.slots() {
            [r] => Some(*r),
            _ => None,
        }
    }
}

/// A numeric field that may hold a `P<k>` token inside a cmd_def.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Value(f64),
    Token(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Value(v) => Some(*v),
            ParamValue::Token(_) => None,
        }
    }

    /// Parameter index for a `Pk`/`pk` token.
    pub fn token_index(&self) -> Option<usize> {
        self.token().map(|(_, k)| k)
    }

    /// Sign and parameter index of a `Pk`, `pk` or negated `-pk` token.
    pub fn token(&self) -> Option<(f64, usize)> {
        let ParamValue::Token(t) = self else { return None };
        let (sign, t) = match t.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, t.as_str()),
        };
        let rest = t.strip_prefix('P').or_else(|| t.strip_prefix('p'))?;
        rest.parse().ok().map(|k| (sign, k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bfunc {
    pub mask: String,
    pub relation: String,
    pub val: String,
    pub register: RegisterRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Copy {
    pub register_orig: usize,
    pub register_copy: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texparams: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<usize>,
}

impl Gate {
    pub fn params(&self) -> &[f64] {
        self.params.as_deref().unwrap_or(&[])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qubits {
    pub qubits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub qubits: Vec<usize>,
    pub memory: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub register: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub label: String,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivePulse {
    pub name: String,
    pub t0: u64,
    pub ch: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameChange {
    pub t0: u64,
    pub ch: String,
    pub phase: ParamValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistentValue {
    pub t0: u64,
    pub ch: String,
    pub val: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
}

impl KernelSpec {
    pub fn params(&self) -> &[f64] {
        self.params.as_deref().unwrap_or(&[])
    }
}

/// Discriminators share the kernel shape.
pub type DiscriminatorSpec = KernelSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Acquire {
    pub t0: u64,
    pub duration: u64,
    // cmd_def measure entries leave these for the lowering pass to fill in
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_slot: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub register_slot: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<Vec<KernelSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discriminators: Option<Vec<DiscriminatorSpec>>,
}

impl Acquire {
    pub fn qubits(&self) -> &[usize] {
        self.qubits.as_deref().unwrap_or(&[])
    }

    pub fn memory_slot(&self) -> &[usize] {
        self.memory_slot.as_deref().unwrap_or(&[])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Bfunc(Bfunc),
    Copy(Copy),
    Gate(Gate),
    Barrier(Qubits),
    Reset(Qubits),
    Measure(Measure),
    Snapshot(Snapshot),
    Drive(DrivePulse),
    FrameChange(FrameChange),
    PersistentValue(PersistentValue),
    Acquire(Acquire),
}

impl Instruction {
    pub fn name(&self) -> &str {
        match self {
            Instruction::Bfunc(_) => "bfunc",
            Instruction::Copy(_) => "copy",
            Instruction::Gate(g) => &g.name,
            Instruction::Barrier(_) => "barrier",
            Instruction::Reset(_) => "reset",
            Instruction::Measure(_) => "measure",
            Instruction::Snapshot(_) => "snapshot",
            Instruction::Drive(p) => &p.name,
            Instruction::FrameChange(_) => "fc",
            Instruction::PersistentValue(_) => "pv",
            Instruction::Acquire(_) => "acquire",
        }
    }

    /// Start time for pulse-level commands.
    pub fn t0(&self) -> Option<u64> {
        match self {
            Instruction::Drive(p) => Some(p.t0),
            Instruction::FrameChange(f) => Some(f.t0),
            Instruction::PersistentValue(p) => Some(p.t0),
            Instruction::Acquire(a) => Some(a.t0),
            Instruction::Snapshot(s) => s.t0,
            _ => None,
        }
    }

    pub fn set_t0(&mut self, t: u64) {
        match self {
            Instruction::Drive(p) => p.t0 = t,
            Instruction::FrameChange(f) => f.t0 = t,
            Instruction::PersistentValue(p) => p.t0 = t,
            Instruction::Acquire(a) => a.t0 = t,
            Instruction::Snapshot(s) => s.t0 = Some(t),
            _ => {}
        }
    }

    pub fn channel(&self) -> Option<&str> {
        match self {
            Instruction::Drive(p) => Some(&p.ch),
            Instruction::FrameChange(f) => Some(&f.ch),
            Instruction::PersistentValue(p) => Some(&p.ch),
            _ => None,
        }
    }

    pub fn conditional(&self) -> Option<usize> {
        match self {
            Instruction::Gate(g) => g.conditional,
            Instruction::Drive(p) => p.conditional,
            Instruction::FrameChange(f) => f.conditional,
            _ => None,
        }
    }

    pub fn is_pulse_command(&self) -> bool {
        matches!(
            self,
            Instruction::Drive(_)
                | Instruction::FrameChange(_)
                | Instruction::PersistentValue(_)
                | Instruction::Acquire(_)
        )
    }
}

fn inner<T: serde::de::DeserializeOwned, E: de::Error>(v: Value) -> Result<T, E> {
    serde_path_to_error::deserialize::<_, T>(v).map_err(|e| nested_error("", e))
}

impl<'de> Deserialize<'de> for Instruction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        let Value::Object(mut map) = v else {
            return Err(de::Error::custom("instruction must be an object"));
        };
        let name = match map.get("name") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => {
                return Err(de::Error::custom(format!(
                    "{m}/name{m}expected a string",
                    m = super::parse::NESTED_MARK
                )))
            }
            None => return Err(de::Error::missing_field("name")),
        };
        if RESERVED_NAMES.contains(&name.as_str()) {
            map.remove("name");
        }
        let v = Value::Object(map);
        Ok(match name.as_str() {
            "bfunc" => Instruction::Bfunc(inner(v)?),
            "copy" => Instruction::Copy(inner(v)?),
            "barrier" => Instruction::Barrier(inner(v)?),
            "reset" => Instruction::Reset(inner(v)?),
            "measure" => Instruction::Measure(inner(v)?),
            "snapshot" => Instruction::Snapshot(inner(v)?),
            "fc" => Instruction::FrameChange(inner(v)?),
            "pv" => Instruction::PersistentValue(inner(v)?),
            "acquire" => Instruction::Acquire(inner(v)?),
            _ if v.get("ch").is_some() => Instruction::Drive(inner(v)?),
            _ => Instruction::Gate(inner(v)?),
        })
    }
}

impl Serialize for Instruction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let body = match self {
            Instruction::Bfunc(x) => serde_json::to_value(x),
            Instruction::Copy(x) => serde_json::to_value(x),
            Instruction::Gate(x) => serde_json::to_value(x),
            Instruction::Barrier(x) | Instruction::Reset(x) => serde_json::to_value(x),
            Instruction::Measure(x) => serde_json::to_value(x),
            Instruction::Snapshot(x) => serde_json::to_value(x),
            Instruction::Drive(x) => serde_json::to_value(x),
            Instruction::FrameChange(x) => serde_json::to_value(x),
            Instruction::PersistentValue(x) => serde_json::to_value(x),
            Instruction::Acquire(x) => serde_json::to_value(x),
        }
        .map_err(S::Error::custom)?;
        let mut out = Map::new();
        out.insert("name".into(), Value::String(self.name().to_string()));
        if let Value::Object(m) = body {
            for (k, v) in m {
                if k != "name" {
                    out.insert(k, v);
                }
            }
        }
        Value::Object(out).serialize(s)
    }
}
