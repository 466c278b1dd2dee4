//! Any wire-format document, checked on its own or inside a wrapping Qobj.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::backend::Backend;
use crate::hamiltonian::HamiltonianSpec;
use crate::model::defaults::CmdDefEntry;
use crate::model::properties::parse_iso8601;
use crate::model::validate::{self, check_pulse_library, Options};
use crate::model::{
    decode_hex, parse, BackendConfiguration, BackendProperties, BackendStatus, ExpData, Experiment,
    ExperimentResult, GateConfig, GateProp, GeneralParameters, HamiltonianDict, Instruction, JobStatus, KernelSpec,
    MemoryData, Mode, Nduv, ParseError, Parsed, PulseDefaults, PulseLibEntry, ResultDocument, Shots, UserConfig,
    ValidationReport,
};
use crate::qasm::qasm_def::parse_qasm_def;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    Configuration,
    Defaults,
    Properties,
    Nduv,
    GateProp,
    GeneralParameters,
    GateConfig,
    Status,
    Qobj,
    Experiment,
    Experiments,
    UserConfig,
    JobStatus,
    Result,
    ExperimentResult,
    ExpData,
    SnapshotData,
    Instruction,
    Instructions,
    Hamiltonian,
    Kernel,
    PulseLibEntry,
    PulseLibrary,
    CmdDef,
    CmdDefs,
}

impl DocKind {
    pub const ALL: [DocKind; 25] = [
        DocKind::Configuration,
        DocKind::Defaults,
        DocKind::Properties,
        DocKind::Nduv,
        DocKind::GateProp,
        DocKind::GeneralParameters,
        DocKind::GateConfig,
        DocKind::Status,
        DocKind::Qobj,
        DocKind::Experiment,
        DocKind::Experiments,
        DocKind::UserConfig,
        DocKind::JobStatus,
        DocKind::Result,
        DocKind::ExperimentResult,
        DocKind::ExpData,
        DocKind::SnapshotData,
        DocKind::Instruction,
        DocKind::Instructions,
        DocKind::Hamiltonian,
        DocKind::Kernel,
        DocKind::PulseLibEntry,
        DocKind::PulseLibrary,
        DocKind::CmdDef,
        DocKind::CmdDefs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocKind::Configuration => "configuration",
            DocKind::Defaults => "defaults",
            DocKind::Properties => "properties",
            DocKind::Nduv => "nduv",
            DocKind::GateProp => "gate_prop",
            DocKind::GeneralParameters => "general_parameters",
            DocKind::GateConfig => "gate_config",
            DocKind::Status => "status",
            DocKind::Qobj => "qobj",
            DocKind::Experiment => "experiment",
            DocKind::Experiments => "experiments",
            DocKind::UserConfig => "user_config",
            DocKind::JobStatus => "job_status",
            DocKind::Result => "result",
            DocKind::ExperimentResult => "experiment_result",
            DocKind::ExpData => "exp_data",
            DocKind::SnapshotData => "snapshot_data",
            DocKind::Instruction => "instruction",
            DocKind::Instructions => "instructions",
            DocKind::Hamiltonian => "hamiltonian",
            DocKind::Kernel => "kernel",
            DocKind::PulseLibEntry => "pulse_lib_entry",
            DocKind::PulseLibrary => "pulse_library",
            DocKind::CmdDef => "cmd_def",
            DocKind::CmdDefs => "cmd_defs",
        }
    }
}

impl fmt::Display for DocKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DocKind {
    type Err = String;
    fn from_str(s: &str) -> Result<DocKind, String> {
        DocKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown document kind {s:?}"))
    }
}

fn has(o: &Map<String, Value>, keys: &[&str]) -> bool {
    keys.iter().all(|k| o.contains_key(*k))
}

/// Guesses the kind of a document from its keys.
pub fn detect_kind(v: &Value) -> Option<DocKind> {
    match v {
        Value::Array(items) => match items.first()? {
            Value::Object(o) if o.contains_key("instructions") => Some(DocKind::Experiments),
            Value::Object(o) if has(o, &["name", "samples"]) => Some(DocKind::PulseLibrary),
            Value::Object(o) if has(o, &["name", "qubits"]) && (o.contains_key("sequence") || o.contains_key("instructions")) => {
                Some(DocKind::CmdDefs)
            }
            Value::Object(o) if o.contains_key("name") => Some(DocKind::Instructions),
            _ => None,
        },
        Value::Object(o) => {
            let kind = if has(o, &["qobj_id", "experiments"]) {
                DocKind::Qobj
            } else if has(o, &["results", "backend_name"]) {
                DocKind::Result
            } else if has(o, &["backend_name", "n_qubits"]) {
                DocKind::Configuration
            } else if has(o, &["qubit_freq_est", "cmd_def"]) {
                DocKind::Defaults
            } else if o.contains_key("last_update_date") {
                DocKind::Properties
            } else if o.contains_key("operational") {
                DocKind::Status
            } else if has(o, &["job_id", "status"]) {
                DocKind::JobStatus
            } else if o.contains_key("general_parameters") {
                DocKind::GeneralParameters
            } else if o.contains_key("h_latex") {
                DocKind::Hamiltonian
            } else if has(o, &["shots", "data"]) {
                DocKind::ExperimentResult
            } else if o.contains_key("instructions") && !o.contains_key("name") {
                DocKind::Experiment
            } else if has(o, &["name", "qubits"]) && (o.contains_key("sequence") || o.contains_key("instructions")) {
                DocKind::CmdDef
            } else if has(o, &["name", "qasm_def"]) {
                DocKind::GateConfig
            } else if has(o, &["name", "samples"]) {
                DocKind::PulseLibEntry
            } else if has(o, &["name", "date", "unit", "value"]) {
                DocKind::Nduv
            } else if has(o, &["gate", "qubits", "parameters"]) {
                DocKind::GateProp
            } else if has(o, &["name", "params"]) && o.len() == 2 {
                DocKind::Kernel
            } else if o.contains_key("name") {
                DocKind::Instruction
            } else if ["counts", "memory", "statevector", "unitary", "snapshots"]
                .iter()
                .any(|k| o.contains_key(*k))
            {
                DocKind::ExpData
            } else if ["shots", "memory_slots", "meas_level", "pulse_library", "seed"]
                .iter()
                .any(|k| o.contains_key(*k))
            {
                DocKind::UserConfig
            } else {
                return None;
            };
            Some(kind)
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CheckOptions<'a> {
    /// Backend for kinds whose rules depend on a device.
    pub backend: Option<&'a Backend>,
    /// Job config used when a fragment has to be wrapped into a Qobj.
    pub wrap_config: Option<&'a Value>,
    pub mode: Mode,
    pub strict: bool,
}

/// Result of checking one document.
#[derive(Debug, Clone)]
pub struct Checked {
    pub kind: DocKind,
    /// The typed model written back out.
    pub roundtrip: Value,
    pub report: ValidationReport,
}

impl Checked {
    /// `{"kind", "valid", "violations"}` as printed by `validate --json`.
    pub fn summary(&self) -> Value {
        serde_json::json!({
            "kind": self.kind,
            "valid": !self.report.has_errors(),
            "violations": self.report.violations,
        })
    }
}

fn typed<T>(v: Value, mode: Mode) -> Result<(Parsed<T>, Value, ValidationReport), ParseError>
where
    T: serde::de::DeserializeOwned + Serialize,
{
    let p: Parsed<T> = parse::parse_doc(v, mode)?;
    let mut r = ValidationReport::default();
    r.add_unknown(&p);
    let out = p.to_value();
    Ok((p, out, r))
}

fn date_check(path: String, d: &str, r: &mut ValidationReport) {
    if parse_iso8601(d).is_none() {
        r.error(path, "not an ISO 8601 date");
    }
}

fn check_exp_data(d: &ExpData, base: &str, r: &mut ValidationReport) {
    if let Some(c) = &d.counts {
        for (k, n) in c {
            if decode_hex(k).is_err() {
                r.error(validate::child(&format!("{base}/counts"), k), format!("{k:?} is not a hex key"));
            }
            let _ = n;
        }
    }
    if let Some(MemoryData::Hex(m)) = &d.memory {
        for (i, s) in m.iter().enumerate() {
            if decode_hex(s).is_err() {
                r.error(format!("{base}/memory/{i}"), format!("{s:?} is not a hex value"));
            }
        }
    }
    if let Some(u) = &d.unitary {
        if u.iter().any(|row| row.len() != u.len()) {
            r.error(format!("{base}/unitary"), "unitary must be square");
        }
    }
    if let Some(s) = &d.snapshots {
        check_snapshots(s, &format!("{base}/snapshots"), r);
    }
}

fn check_snapshots(s: &Map<String, Value>, base: &str, r: &mut ValidationReport) {
    for (k, v) in s {
        if !v.is_object() {
            r.error(validate::child(base, k), "snapshot type must map labels to data");
        }
    }
}

fn check_experiment_result(e: &ExperimentResult, base: &str, r: &mut ValidationReport) {
    if let Shots::Window([a, b]) = e.shots {
        if a > b {
            r.error(format!("{base}/shots"), format!("window start {a} exceeds end {b}"));
        }
    }
    check_exp_data(&e.data, &format!("{base}/data"), r);
}

fn check_cmd_def(e: &CmdDefEntry, base: &str, r: &mut ValidationReport) {
    let key = if e.sequence.is_some() { "sequence" } else { "instructions" };
    if e.sequence.is_none() && e.instructions.is_none() {
        r.error(base, "cmd_def entry needs a sequence");
    }
    for (i, ins) in e.commands().iter().enumerate() {
        if !matches!(
            ins,
            Instruction::Drive(_) | Instruction::FrameChange(_) | Instruction::PersistentValue(_) | Instruction::Acquire(_)
        ) {
            r.error(format!("{base}/{key}/{i}"), format!("{:?} is not a pulse command", ins.name()));
        }
    }
}

fn is_pulse(ins: &Instruction) -> bool {
    matches!(
        ins,
        Instruction::Drive(_) | Instruction::FrameChange(_) | Instruction::PersistentValue(_) | Instruction::Acquire(_)
    )
}

/// Moves violations from the wrapper's coordinates back into the fragment's.
fn remap(report: ValidationReport, prefix: &str) -> ValidationReport {
    let mut out = ValidationReport::default();
    for mut v in report.violations {
        if let Some(rest) = v.path.strip_prefix(prefix) {
            if rest.is_empty() || rest.starts_with('/') {
                v.path = rest.to_string();
            }
        } else {
            v.message = format!("{} (in the wrapping job at {})", v.message, v.path);
            v.path = String::new();
        }
        out.violations.push(v);
    }
    out
}

fn default_wrap_config(b: &Backend) -> Value {
    let slots = if b.configuration.n_qubits > 0 { b.configuration.n_qubits } else { 8 };
    json!({"shots": 1, "memory_slots": slots})
}

/// Validates experiments by wrapping them into a Qobj for `ctx.backend`.
fn wrapped(experiments: Vec<Value>, pulse: bool, ctx: &CheckOptions, prefix: &str) -> Result<ValidationReport, ParseError> {
    let Some(b) = ctx.backend else {
        let mut r = ValidationReport::default();
        r.warning("", "no backend given; checked structure only");
        return Ok(r);
    };
    let config = ctx.wrap_config.cloned().unwrap_or_else(|| default_wrap_config(b));
    let q = json!({
        "qobj_id": "wrapped",
        "type": if pulse { "PULSE" } else { "QASM" },
        "schema_version": "1.0",
        "experiments": experiments,
        "config": config,
    });
    let parsed = crate::model::parse_qobj_value(q.clone(), Mode::Lenient).map_err(|e| ParseError {
        pointer: String::new(),
        message: format!("wrapping job: {e}"),
    })?;
    let r = b.validate(&parsed, &q, Options { strict: ctx.strict });
    Ok(remap(r, prefix))
}

/// Parses `value` as `kind`, runs the kind's checks, and returns the
/// re-serialized document.
pub fn check_document(kind: DocKind, value: Value, ctx: &CheckOptions) -> Result<Checked, ParseError> {
    let mode = ctx.mode;
    let (roundtrip, report) = match kind {
        DocKind::Configuration => {
            let (p, v, mut r) = typed::<BackendConfiguration>(value, mode)?;
            r.extend(validate::validate_configuration(&p));
            (v, r)
        }
        DocKind::Defaults => {
            let (p, v, mut r) = typed::<PulseDefaults>(value, mode)?;
            let cfg = ctx.backend.map(|b| &*b.configuration);
            r.extend(validate::validate_defaults(&p, cfg));
            (v, r)
        }
        DocKind::Properties => {
            let (p, v, mut r) = typed::<BackendProperties>(value, mode)?;
            let cfg = ctx.backend.map(|b| &*b.configuration);
            r.extend(validate::validate_properties(&p, cfg));
            (v, r)
        }
        DocKind::Nduv => {
            let (p, v, mut r) = typed::<Nduv>(value, mode)?;
            date_check("/date".into(), &p.date, &mut r);
            (v, r)
        }
        DocKind::GateProp => {
            let (p, v, mut r) = typed::<GateProp>(value, mode)?;
            for (i, n) in p.parameters.iter().enumerate() {
                date_check(format!("/parameters/{i}/date"), &n.date, &mut r);
            }
            (v, r)
        }
        DocKind::GeneralParameters => {
            let (p, v, mut r) = typed::<GeneralParameters>(value, mode)?;
            for (i, n) in p.general_parameters.iter().enumerate() {
                date_check(format!("/general_parameters/{i}/date"), &n.date, &mut r);
            }
            (v, r)
        }
        DocKind::GateConfig => {
            let (p, v, mut r) = typed::<GateConfig>(value, mode)?;
            match parse_qasm_def(&p.qasm_def) {
                Ok(d) => {
                    if d.name != p.name {
                        r.error("/qasm_def", format!("defines {:?}, expected {:?}", d.name, p.name));
                    }
                    if d.params.len() != p.parameters.len() {
                        r.error("/parameters", "parameter count differs from qasm_def");
                    }
                    for (c, q) in p.coupling_map.iter().enumerate() {
                        if q.len() != d.args.len() {
                            r.error(format!("/coupling_map/{c}"), format!("gate acts on {} qubit(s)", d.args.len()));
                        }
                    }
                }
                Err(e) => r.error("/qasm_def", e.to_string()),
            }
            (v, r)
        }
        DocKind::Status => {
            let (_, v, r) = typed::<BackendStatus>(value, mode)?;
            (v, r)
        }
        DocKind::JobStatus => {
            let (_, v, r) = typed::<JobStatus>(value, mode)?;
            (v, r)
        }
        DocKind::Qobj => {
            let p = crate::model::parse_qobj_value(value.clone(), mode)?;
            let v = p.to_value();
            let r = match ctx.backend {
                Some(b) => b.validate(&p, &value, Options { strict: ctx.strict }),
                None => {
                    let mut r = ValidationReport::default();
                    r.add_unknown(&p);
                    r.warning("", "no backend given; checked structure only");
                    r
                }
            };
            (v, r)
        }
        DocKind::Experiment => {
            let (p, v, mut r) = typed::<Experiment>(value, mode)?;
            let pulse = p.instructions.iter().any(is_pulse);
            r.extend(wrapped(vec![v.clone()], pulse, ctx, "/experiments/0")?);
            (v, r)
        }
        DocKind::Experiments => {
            let (p, v, mut r) = typed::<Vec<Experiment>>(value, mode)?;
            let pulse = p.iter().flat_map(|e| &e.instructions).any(is_pulse);
            let items = v.as_array().cloned().unwrap_or_default();
            r.extend(wrapped(items, pulse, ctx, "/experiments")?);
            (v, r)
        }
        DocKind::Instruction => {
            let (p, v, mut r) = typed::<Instruction>(value, mode)?;
            let exp = json!({"instructions": [v.clone()]});
            r.extend(wrapped(vec![exp], is_pulse(&p), ctx, "/experiments/0/instructions/0")?);
            (v, r)
        }
        DocKind::Instructions => {
            let (p, v, mut r) = typed::<Vec<Instruction>>(value, mode)?;
            let exp = json!({"instructions": v.clone()});
            r.extend(wrapped(vec![exp], p.iter().any(is_pulse), ctx, "/experiments/0/instructions")?);
            (v, r)
        }
        DocKind::UserConfig => {
            let (p, v, mut r) = typed::<UserConfig>(value, mode)?;
            if let Some(lib) = &p.pulse_library {
                check_pulse_library(lib, "/pulse_library", &mut r);
            }
            if p.shots == Some(0) {
                r.error("/shots", "shots must be at least 1");
            }
            if p.meas_level == Some(2) && p.meas_return == Some(crate::model::MeasReturn::Avg) {
                r.error("/meas_return", "meas_return is fixed to single at meas_level 2");
            }
            (v, r)
        }
        DocKind::Result => {
            let (p, v, mut r) = typed::<ResultDocument>(value, mode)?;
            if let Some(d) = &p.date {
                date_check("/date".into(), d, &mut r);
            }
            for (i, e) in p.results.iter().enumerate() {
                check_experiment_result(e, &format!("/results/{i}"), &mut r);
            }
            (v, r)
        }
        DocKind::ExperimentResult => {
            let (p, v, mut r) = typed::<ExperimentResult>(value, mode)?;
            check_experiment_result(&p, "", &mut r);
            (v, r)
        }
        DocKind::ExpData => {
            let (p, v, mut r) = typed::<ExpData>(value, mode)?;
            check_exp_data(&p, "", &mut r);
            (v, r)
        }
        DocKind::SnapshotData => {
            let (p, v, mut r) = typed::<Map<String, Value>>(value, mode)?;
            check_snapshots(&p, "", &mut r);
            (v, r)
        }
        DocKind::Hamiltonian => {
            let (p, v, mut r) = typed::<HamiltonianDict>(value, mode)?;
            match HamiltonianSpec::from_dict(&p) {
                Err(e) => r.error("/h_str", e.to_string()),
                Ok(spec) => {
                    if let Some(b) = ctx.backend {
                        let n = b.configuration.n_qubits.max(0) as usize;
                        let e = &b.emulator;
                        let res = spec
                            .layout(n, e.qubit_levels, e.oscillator_levels)
                            .and_then(|l| spec.evaluate(&l, n));
                        if let Err(e) = res {
                            r.error("/h_str", e.to_string());
                        }
                    }
                }
            }
            (v, r)
        }
        DocKind::Kernel => {
            let (_, v, r) = typed::<KernelSpec>(value, mode)?;
            (v, r)
        }
        DocKind::PulseLibEntry => {
            let (p, v, mut r) = typed::<PulseLibEntry>(value, mode)?;
            let lib = vec![p.value];
            let mut inner = ValidationReport::default();
            check_pulse_library(&lib, "", &mut inner);
            r.extend(remap(inner, "/0"));
            (v, r)
        }
        DocKind::PulseLibrary => {
            let (p, v, mut r) = typed::<Vec<PulseLibEntry>>(value, mode)?;
            check_pulse_library(&p, "", &mut r);
            (v, r)
        }
        DocKind::CmdDef => {
            let (p, v, mut r) = typed::<CmdDefEntry>(value, mode)?;
            check_cmd_def(&p, "", &mut r);
            (v, r)
        }
        DocKind::CmdDefs => {
            let (p, v, mut r) = typed::<Vec<CmdDefEntry>>(value, mode)?;
            for (i, e) in p.iter().enumerate() {
                check_cmd_def(e, &format!("/{i}"), &mut r);
            }
            (v, r)
        }
    };
    Ok(Checked { kind, roundtrip, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in DocKind::ALL {
            assert_eq!(k.to_string().parse::<DocKind>().unwrap(), k);
            assert_eq!(serde_json::to_value(k).unwrap(), Value::String(k.to_string()));
        }
    }

    #[test]
    fn detection() {
        assert_eq!(detect_kind(&json!({"qobj_id": "a", "experiments": []})), Some(DocKind::Qobj));
        assert_eq!(detect_kind(&json!({"name": "fc", "t0": 0, "ch": "d0", "phase": 0.1})), Some(DocKind::Instruction));
        assert_eq!(detect_kind(&json!([{"name": "p", "samples": []}])), Some(DocKind::PulseLibrary));
        assert_eq!(detect_kind(&json!({"name": "boxcar", "params": []})), Some(DocKind::Kernel));
        assert_eq!(detect_kind(&json!(3)), None);
    }

    #[test]
    fn remap_strips_prefix() {
        let mut r = ValidationReport::default();
        r.error("/experiments/0/instructions/0/qubits/0", "x");
        r.error("/config/shots", "y");
        let r = remap(r, "/experiments/0/instructions/0");
        assert_eq!(r.violations[0].path, "/qubits/0");
        assert_eq!(r.violations[1].path, "");
        assert!(r.violations[1].message.contains("/config/shots"));
    }

    #[test]
    fn pulse_amplitude_over_one_is_reported() {
        let v = json!({"name": "p", "samples": [[1.2, 0.0]]});
        let c = check_document(DocKind::PulseLibEntry, v, &CheckOptions::default()).unwrap();
        assert!(c.report.has_errors());
        assert_eq!(c.report.violations[0].path, "/samples/0");
    }
}
