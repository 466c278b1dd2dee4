//! Command-line front end. Each subcommand is a thin shell over the library.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::backend::{Backend, Registry, RunOptions};
use crate::document::{check_document, detect_kind, CheckOptions, DocKind};
use crate::model::validate::Options;
use crate::model::{self, ComplexArray, MeasReturn, MemoryData, Mode, QobjType, ResultDocument};
use crate::service::{http, Service, ServiceConfig};

/// Exit code for a clean run.
pub const EXIT_OK: i32 = 0;
/// Validation violations or an execution failure.
pub const EXIT_FAILED: i32 = 1;
/// Unreadable input: I/O, malformed JSON, or a document that does not parse.
pub const EXIT_UNREADABLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qobj-emu", version, about = "Validate, run and serve Qobj jobs against emulated backends")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a document against the wire format and, for jobs, a backend.
    Validate(ValidateArgs),
    /// Execute a Qobj locally and write the result document.
    Run(RunArgs),
    /// Convert a QASM Qobj into a PULSE Qobj through the backend's cmd_def.
    Lower(LowerArgs),
    /// Print a backend's channels, LOs, Hamiltonian and kernels.
    Describe(DescribeArgs),
    /// Write level-0/1 memory of a result document as CSV.
    Csv(CsvArgs),
    /// Run the HTTP job service.
    Serve(ServeArgs),
    /// List the builtin backends.
    Backends,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
    /// Document kind; detected from the keys when omitted.
    #[arg(long)]
    pub kind: Option<DocKind>,
    /// Builtin backend name or fixture file.
    #[arg(long)]
    pub backend: Option<String>,
    /// Unknown keys fail parsing and meas_map splits are errors.
    #[arg(long)]
    pub strict: bool,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub path: PathBuf,
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Result file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Job id written into the result (default: the qobj_id).
    #[arg(long)]
    pub job_id: Option<String>,
    /// Date written into the result.
    #[arg(long)]
    pub date: Option<String>,
}

#[derive(Debug, Args)]
pub struct LowerArgs {
    pub path: PathBuf,
    #[arg(long, default_value = "openpulse_2q")]
    pub backend: String,
}

#[derive(Debug, Args)]
pub struct DescribeArgs {
    /// Builtin backend name or fixture file.
    pub backend: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    /// Result document.
    pub path: PathBuf,
    /// Only this experiment.
    #[arg(long)]
    pub experiment: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "QOBJ_EMU_BIND", default_value = "127.0.0.1")]
    pub bind: String,
    #[arg(long, env = "QOBJ_EMU_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "QOBJ_EMU_DATA_DIR", default_value = "qobj-emu-data")]
    pub data_dir: PathBuf,
    #[arg(long, env = "QOBJ_EMU_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// Extra backend fixtures (*.json) served next to the builtin ones.
    #[arg(long, env = "QOBJ_EMU_BACKENDS")]
    pub backends_dir: Option<PathBuf>,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type Out<'a> = &'a mut dyn Write;

fn io_fail(e: std::io::Error) -> Failure {
    fail(EXIT_FAILED, e.to_string())
}

/// Runs a parsed command line. Diagnostics go to `err`.
pub fn execute(cli: Cli, out: Out, err: Out) -> i32 {
    let r = match cli.command {
        Command::Validate(a) => validate(&a, out),
        Command::Run(a) => run(&a, out),
        Command::Lower(a) => lower(&a, out),
        Command::Describe(a) => describe(&a, out),
        Command::Csv(a) => csv(&a, out),
        Command::Serve(a) => serve(&a),
        Command::Backends => backends(out),
    };
    match r {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let bytes = std::fs::read(path).map_err(|e| fail(EXIT_UNREADABLE, format!("{}: {e}", path.display())))?;
    model::parse::parse_json(&bytes).map_err(|e| fail(EXIT_UNREADABLE, format!("{}: {e}", path.display())))
}

/// A builtin backend by name, or a fixture file by path.
pub fn resolve_backend(spec: &str) -> Result<Arc<Backend>, Failure> {
    if let Some(b) = Registry::builtin().get(spec) {
        return Ok(b.clone());
    }
    let p = Path::new(spec);
    if p.exists() {
        return Backend::from_file(p).map(Arc::new).map_err(|e| fail(EXIT_UNREADABLE, e.to_string()));
    }
    let names: Vec<_> = Registry::builtin().names().map(str::to_string).collect();
    Err(fail(
        EXIT_FAILED,
        format!("no backend {spec:?} (builtin: {})", names.join(", ")),
    ))
}

fn default_backend(raw: &Value) -> &'static str {
    match raw.get("type").and_then(Value::as_str) {
        Some("PULSE") => "openpulse_2q",
        _ => "qasm_simulator",
    }
}

fn validate(a: &ValidateArgs, out: Out) -> Result<i32, Failure> {
    let v = read_json(&a.path)?;
    let kind = match a.kind.or_else(|| detect_kind(&v)) {
        Some(k) => k,
        None => return Err(fail(EXIT_UNREADABLE, "cannot tell the document kind; pass --kind")),
    };
    let backend = match (&a.backend, kind) {
        (Some(b), _) => Some(resolve_backend(b)?),
        (None, DocKind::Qobj) => Some(resolve_backend(default_backend(&v))?),
        _ => None,
    };
    let opts = CheckOptions {
        backend: backend.as_deref(),
        wrap_config: None,
        mode: if a.strict { Mode::Strict } else { Mode::Lenient },
        strict: a.strict,
    };
    let checked = match check_document(kind, v, &opts) {
        Ok(c) => c,
        Err(e) => {
            if a.json {
                let j = json!({"kind": kind, "parse_error": {"pointer": e.pointer, "message": e.message}});
                writeln!(out, "{j}").map_err(io_fail)?;
            }
            return Err(fail(EXIT_UNREADABLE, format!("{}: {e}", a.path.display())));
        }
    };
    let r = &checked.report;
    if a.json {
        writeln!(out, "{}", checked.summary()).map_err(io_fail)?;
    } else {
        for v in &r.violations {
            writeln!(out, "{v}").map_err(io_fail)?;
        }
        let errors = r.errors().count();
        let warnings = r.violations.len() - errors;
        if errors == 0 {
            writeln!(out, "{}: valid {kind} ({warnings} warning(s))", a.path.display()).map_err(io_fail)?;
        } else {
            writeln!(out, "{}: {errors} error(s), {warnings} warning(s)", a.path.display()).map_err(io_fail)?;
        }
    }
    Ok(if r.has_errors() { EXIT_FAILED } else { EXIT_OK })
}

/// Parses, validates and runs a Qobj file. Shared by `run` and tests.
pub fn run_file(path: &Path, backend: Option<&str>, opts: &RunOptions) -> Result<ResultDocument, Failure> {
    let raw = read_json(path)?;
    let b = resolve_backend(backend.unwrap_or_else(|| default_backend(&raw)))?;
    let q = model::parse_qobj_value(raw.clone(), Mode::Lenient)
        .map_err(|e| fail(EXIT_UNREADABLE, format!("{}: {e}", path.display())))?;
    let report = b.validate(&q, &raw, Options::default());
    if report.has_errors() {
        let lines: Vec<String> = report.errors().map(|v| v.to_string()).collect();
        return Err(fail(EXIT_FAILED, format!("Qobj rejected by {}:\n{}", b.name(), lines.join("\n"))));
    }
    let mut opts = opts.clone();
    if opts.job_id.is_empty() {
        opts.job_id = q.qobj_id.clone();
    }
    b.run(&q, &opts).map_err(|e| fail(EXIT_FAILED, e.to_string()))
}

fn run(a: &RunArgs, out: Out) -> Result<i32, Failure> {
    let opts = RunOptions {
        job_id: a.job_id.clone().unwrap_or_default(),
        date: a.date.clone(),
        seed: a.seed,
        cancel: None,
    };
    let doc = run_file(&a.path, a.backend.as_deref(), &opts)?;
    let text = model::to_json(&doc);
    match &a.out {
        Some(p) => std::fs::write(p, text).map_err(|e| fail(EXIT_FAILED, format!("{}: {e}", p.display())))?,
        None => writeln!(out, "{text}").map_err(io_fail)?,
    }
    Ok(EXIT_OK)
}

fn lower(a: &LowerArgs, out: Out) -> Result<i32, Failure> {
    let raw = read_json(&a.path)?;
    let q = model::parse_qobj_value(raw, Mode::Lenient)
        .map_err(|e| fail(EXIT_UNREADABLE, format!("{}: {e}", a.path.display())))?;
    if q.kind != QobjType::Qasm {
        return Err(fail(EXIT_FAILED, "only QASM jobs can be lowered"));
    }
    let b = resolve_backend(&a.backend)?;
    let p = b.lower(&q).map_err(|e| fail(EXIT_FAILED, e.to_string()))?;
    writeln!(out, "{}", model::to_json_pretty(&p)).map_err(io_fail)?;
    Ok(EXIT_OK)
}

fn describe(a: &DescribeArgs, out: Out) -> Result<i32, Failure> {
    let d = resolve_backend(&a.backend)?.describe();
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&d).expect("description serializes")).map_err(io_fail)?;
    } else {
        write!(out, "{}", d.render()).map_err(io_fail)?;
    }
    Ok(EXIT_OK)
}

/// CSV rows `experiment,shot,slot,sample,re,im` for the complex memory of
/// level-0/1 results. Averaged results leave `shot` empty, level-1 results
/// leave `sample` empty.
pub fn memory_csv(doc: &ResultDocument, only: Option<usize>) -> Result<String, String> {
    let mut s = String::from("experiment,shot,slot,sample,re,im\n");
    let mut any = false;
    for (i, r) in doc.results.iter().enumerate() {
        if only.is_some_and(|o| o != i) {
            continue;
        }
        let Some(MemoryData::Complex(a)) = &r.data.memory else { continue };
        any = true;
        let single = r.meas_return != Some(MeasReturn::Avg);
        let mut row = |shot: Option<usize>, slot: usize, sample: Option<usize>, c: &num_complex::Complex64| {
            let f = |x: Option<usize>| x.map_or(String::new(), |x| x.to_string());
            s.push_str(&format!("{i},{},{slot},{},{},{}\n", f(shot), f(sample), c.re, c.im));
        };
        match a {
            ComplexArray::D1(v) => v.iter().enumerate().for_each(|(k, c)| row(None, k, None, c)),
            ComplexArray::D2(v) if single => {
                for (t, slots) in v.iter().enumerate() {
                    slots.iter().enumerate().for_each(|(k, c)| row(Some(t), k, None, c));
                }
            }
            ComplexArray::D2(v) => {
                for (k, samples) in v.iter().enumerate() {
                    samples.iter().enumerate().for_each(|(l, c)| row(None, k, Some(l), c));
                }
            }
            ComplexArray::D3(v) => {
                for (t, slots) in v.iter().enumerate() {
                    for (k, samples) in slots.iter().enumerate() {
                        samples.iter().enumerate().for_each(|(l, c)| row(Some(t), k, Some(l), c));
                    }
                }
            }
        }
    }
    if any {
        Ok(s)
    } else {
        Err("no level 0 or level 1 memory in the selected results".into())
    }
}

fn csv(a: &CsvArgs, out: Out) -> Result<i32, Failure> {
    let v = read_json(&a.path)?;
    let doc: ResultDocument = model::parse::from_value(v)
        .map_err(|e| fail(EXIT_UNREADABLE, format!("{}: {e}", a.path.display())))?;
    let text = memory_csv(&doc, a.experiment).map_err(|e| fail(EXIT_FAILED, e))?;
    write!(out, "{text}").map_err(io_fail)?;
    Ok(EXIT_OK)
}

fn backends(out: Out) -> Result<i32, Failure> {
    for b in Registry::builtin().iter() {
        let kind = if b.configuration.open_pulse { "pulse" } else { "qasm" };
        writeln!(out, "{:<22} {:>2} qubits  {kind}", b.name(), b.configuration.n_qubits).map_err(io_fail)?;
    }
    Ok(EXIT_OK)
}

fn serve(a: &ServeArgs) -> Result<i32, Failure> {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .try_init();
    let mut registry = Registry::builtin();
    if let Some(d) = &a.backends_dir {
        registry.load_dir(d).map_err(|e| fail(EXIT_UNREADABLE, e.to_string()))?;
    }
    let cfg = ServiceConfig { data_dir: Some(a.data_dir.clone()), workers: a.workers.max(1) };
    let svc = Service::start(registry, &cfg).map_err(|e| fail(EXIT_FAILED, e.to_string()))?;
    let rt = tokio::runtime::Runtime::new().map_err(io_fail)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((a.bind.as_str(), a.port)).await?;
        tracing::info!("listening on {}", listener.local_addr()?);
        http::serve(listener, svc, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })
    .map_err(io_fail)?;
    Ok(EXIT_OK)
}
