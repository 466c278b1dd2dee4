//! Backends: configuration documents bound to an execution engine.

mod describe;
mod registry;

use std::path::Path;
use std::sync::atomic::AtomicBool;
use std::sync::{Arc, OnceLock};

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

pub use describe::{ChannelInfo, Description};
pub use registry::{Registry, BUILTIN_BACKENDS};

use crate::error::EngineError;
use crate::hamiltonian::EvaluatedHamiltonian;
use crate::lowering::{lower_qobj, LoweringError};
use crate::model::validate::{self, Options};
use crate::model::{
    parse, BackendConfiguration, BackendProperties, BackendStatus, ExperimentResult, Mode, ParseError, Parsed,
    PulseDefaults, Qobj, QobjType, ResultDocument, ValidationReport,
};
use crate::pulse::{self, EmulatorParams, PulseContext};
use crate::qasm::{self, GateSet, QasmContext};
use crate::rng::fresh_seed;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("{file}: {source}")]
    Parse { file: String, source: ParseError },
    #[error("{file}: invalid {part}: {report}")]
    Invalid {
        file: String,
        part: &'static str,
        report: String,
    },
    #[error("{file}: bad schema: {message}")]
    Schema { file: String, message: String },
    #[error("{file}: {message}")]
    Io { file: String, message: String },
    #[error("duplicate backend name {0:?}")]
    Duplicate(String),
}

#[derive(Debug, Clone, Deserialize)]
struct StatusFixture {
    operational: bool,
    status_msg: String,
}

/// On-disk layout of a backend fixture.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Fixture {
    configuration: Value,
    #[serde(default)]
    defaults: Option<Value>,
    #[serde(default)]
    properties: Option<Value>,
    #[serde(default)]
    schema: Option<Value>,
    #[serde(default)]
    status: Option<StatusFixture>,
    #[serde(default)]
    emulator: Option<EmulatorParams>,
}

pub struct Backend {
    pub configuration: Parsed<BackendConfiguration>,
    pub defaults: Option<Parsed<PulseDefaults>>,
    pub properties: Option<Parsed<BackendProperties>>,
    /// JSON Schema every submitted Qobj must satisfy.
    pub schema: Value,
    pub emulator: EmulatorParams,
    pub operational: bool,
    pub status_msg: String,
    gates: GateSet,
    validator: jsonschema::Validator,
    hamiltonian: OnceLock<Result<Arc<EvaluatedHamiltonian>, EngineError>>,
}

impl std::fmt::Debug for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Backend").field("name", &self.name()).finish_non_exhaustive()
    }
}

/// Per-run settings that are not part of the Qobj.
#[derive(Debug, Clone, Default)]
pub struct RunOptions<'a> {
    pub job_id: String,
    pub date: Option<String>,
    /// Overrides any seed in the Qobj.
    pub seed: Option<u64>,
    pub cancel: Option<&'a AtomicBool>,
}

fn part<T>(file: &str, v: Value) -> Result<Parsed<T>, BackendError>
where
    T: serde::de::DeserializeOwned + serde::Serialize,
{
    parse::parse_doc(v, Mode::Strict).map_err(|source| BackendError::Parse {
        file: file.to_string(),
        source,
    })
}

fn check(file: &str, what: &'static str, r: ValidationReport) -> Result<(), BackendError> {
    if r.has_errors() {
        return Err(BackendError::Invalid {
            file: file.into(),
            part: what,
            report: r.errors().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
        });
    }
    Ok(())
}

impl Backend {
    /// Builds a backend from a fixture document; `file` labels errors.
    pub fn from_value(file: &str, v: Value) -> Result<Backend, BackendError> {
        let fx: Fixture = parse::from_value(v).map_err(|source| BackendError::Parse {
            file: file.into(),
            source,
        })?;
        let configuration: Parsed<BackendConfiguration> = part(file, fx.configuration)?;
        check(file, "configuration", validate::validate_configuration(&configuration))?;
        let defaults: Option<Parsed<PulseDefaults>> = fx.defaults.map(|d| part(file, d)).transpose()?;
        if let Some(d) = &defaults {
            check(file, "defaults", validate::validate_defaults(d, Some(&configuration)))?;
        }
        let properties: Option<Parsed<BackendProperties>> = fx.properties.map(|p| part(file, p)).transpose()?;
        if let Some(p) = &properties {
            check(file, "properties", validate::validate_properties(p, Some(&configuration)))?;
        }
        let schema = fx.schema.unwrap_or_else(|| Value::Object(Default::default()));
        let validator = jsonschema::validator_for(&schema).map_err(|e| BackendError::Schema {
            file: file.into(),
            message: e.to_string(),
        })?;
        let gates = GateSet::from_config(&configuration).map_err(|e| BackendError::Invalid {
            file: file.into(),
            part: "gates",
            report: e.to_string(),
        })?;
        let status = fx.status.unwrap_or(StatusFixture {
            operational: true,
            status_msg: "active".into(),
        });
        Ok(Backend {
            configuration,
            defaults,
            properties,
            schema,
            emulator: fx.emulator.unwrap_or_default(),
            operational: status.operational,
            status_msg: status.status_msg,
            gates,
            validator,
            hamiltonian: OnceLock::new(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Backend, BackendError> {
        let file = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|e| BackendError::Io {
            file: file.clone(),
            message: e.to_string(),
        })?;
        let v = parse::parse_json(&bytes).map_err(|source| BackendError::Parse {
            file: file.clone(),
            source,
        })?;
        Backend::from_value(&file, v)
    }

    pub fn name(&self) -> &str {
        &self.configuration.backend_name
    }

    pub fn version(&self) -> &str {
        &self.configuration.backend_version
    }

    pub fn gates(&self) -> &GateSet {
        &self.gates
    }

    pub fn status(&self, pending_jobs: u64) -> BackendStatus {
        BackendStatus {
            backend_name: Some(self.name().to_string()),
            backend_version: Some(self.version().to_string()),
            operational: self.operational,
            pending_jobs: Some(pending_jobs),
            status_msg: self.status_msg.clone(),
        }
    }

    /// Violations of the backend's JSON Schema, each citing the rule.
    pub fn schema_report(&self, raw: &Value) -> ValidationReport {
        let mut r = ValidationReport::default();
        for e in self.validator.iter_errors(raw) {
            r.error(
                e.instance_path.to_string(),
                format!("{e} (schema rule {})", e.schema_path),
            );
        }
        r
    }

    /// Generic Qobj checks plus the backend's own schema. `raw` is the
    /// document as submitted.
    pub fn validate(&self, q: &Parsed<Qobj>, raw: &Value, opts: Options) -> ValidationReport {
        let mut r = validate::validate_qobj(q, &self.configuration, self.defaults.as_deref(), opts);
        r.extend(self.schema_report(raw));
        r
    }

    /// The evaluated Hamiltonian, computed once per backend.
    pub fn hamiltonian(&self) -> Result<Arc<EvaluatedHamiltonian>, EngineError> {
        self.hamiltonian
            .get_or_init(|| pulse::prepare_hamiltonian(&self.configuration, &self.emulator).map(Arc::new))
            .clone()
    }

    pub fn lower(&self, q: &Qobj) -> Result<Qobj, LoweringError> {
        let empty = PulseDefaults::default();
        let defaults = self.defaults.as_deref().unwrap_or(&empty);
        lower_qobj(q, &self.configuration, defaults)
    }

    /// Executes every experiment. QASM jobs on pulse backends are lowered
    /// through the cmd_def first.
    pub fn run(&self, q: &Qobj, opts: &RunOptions) -> Result<ResultDocument, EngineError> {
        let job_seed = opts.seed.or(q.config.seed).unwrap_or_else(fresh_seed);
        let results = match (q.kind, self.configuration.open_pulse) {
            (QobjType::Qasm, false) => self.run_qasm(q, opts, job_seed)?,
            (QobjType::Qasm, true) => self.run_pulse(&self.lower(q)?, opts, job_seed)?,
            (QobjType::Pulse, true) => self.run_pulse(q, opts, job_seed)?,
            (QobjType::Pulse, false) => {
                return Err(EngineError::Invalid(format!(
                    "{} does not accept OpenPulse experiments",
                    self.name()
                )))
            }
        };
        Ok(ResultDocument {
            backend_name: self.name().to_string(),
            backend_version: self.version().to_string(),
            qobj_id: q.qobj_id.clone(),
            job_id: opts.job_id.clone(),
            date: opts.date.clone(),
            header: q.header.clone(),
            status: Some("COMPLETED".into()),
            success: true,
            results,
        })
    }

    fn experiment_seed(q: &Qobj, i: usize, opts: &RunOptions, job_seed: u64) -> u64 {
        opts.seed
            .or_else(|| q.experiments[i].config.as_ref().and_then(|c| c.seed))
            .unwrap_or(job_seed)
    }

    fn run_qasm(&self, q: &Qobj, opts: &RunOptions, job_seed: u64) -> Result<Vec<ExperimentResult>, EngineError> {
        let cfg = &self.configuration;
        let ctx = QasmContext {
            n_qubits: cfg.n_qubits,
            n_registers: cfg.n_registers(),
            conditional: cfg.conditional,
            gates: &self.gates,
            cancel: opts.cancel,
        };
        (0..q.experiments.len())
            .map(|i| {
                let ec = q.experiment_config(i);
                let seed = Self::experiment_seed(q, i, opts, job_seed);
                qasm::run_experiment(&q.experiments[i], &ec, &ctx, i, seed)
            })
            .collect()
    }

    fn run_pulse(&self, q: &Qobj, opts: &RunOptions, job_seed: u64) -> Result<Vec<ExperimentResult>, EngineError> {
        let h = self.hamiltonian()?;
        let ctx = PulseContext {
            cfg: &self.configuration,
            defaults: self.defaults.as_deref(),
            hamiltonian: &h,
            params: &self.emulator,
            cancel: opts.cancel,
        };
        (0..q.experiments.len())
            .map(|i| {
                let ec = q.experiment_config(i);
                let seed = Self::experiment_seed(q, i, opts, job_seed);
                pulse::run_experiment(&q.experiments[i], &ec, &ctx, i, seed)
            })
            .collect()
    }

    pub fn describe(&self) -> Description {
        Description::of(self)
    }
}
