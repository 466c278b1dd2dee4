//! Semantic checks that run after parsing.
//!
//! Violations are data: every entry carries a JSON pointer that resolves in
//! the document that was validated.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::config::{BackendConfiguration, Channel, ChannelKind, PulseConfigFields};
use super::defaults::{PulseDefaults, PulseLibEntry};
use super::hex::decode_hex;
use super::instruction::{Instruction, RESERVED_PULSE_NAMES};
use super::parse::{escape_token, Parsed};
use super::properties::{parse_iso8601, BackendProperties};
use super::qobj::{MeasReturn, Qobj, QobjType, UserConfig};

pub const SAMPLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let path = if self.path.is_empty() { "/" } else { &self.path };
        write!(f, "{tag}: {path}: {}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn error(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
            severity: Severity::Error,
        });
    }

    pub fn warning(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
            severity: Severity::Warning,
        });
    }

    pub fn has_errors(&self) -> bool {
        self.violations
            .iter()
            .any(|v| v.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub fn add_unknown<T>(&mut self, doc: &Parsed<T>) {
        for u in &doc.unknown {
            self.warning(u.pointer.clone(), "unknown field");
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    /// Promote meas_map splits to errors.
    pub strict: bool,
}

fn is_hex(s: &str) -> bool {
    decode_hex(s).is_ok()
}

/// Resolves the pointer for a merged config key: the experiment override
/// when present, else the job config, else the config object itself.
fn cfg_path(q: &Qobj, exp: usize, key: &str) -> String {
    let exp_has = q.experiments[exp]
        .config
        .as_ref()
        .and_then(|c| serde_json::to_value(c).ok())
        .is_some_and(|v| v.get(key).is_some());
    if exp_has {
        return format!("/experiments/{exp}/config/{key}");
    }
    let job_has = serde_json::to_value(&q.config)
        .ok()
        .is_some_and(|v| v.get(key).is_some());
    if job_has {
        format!("/config/{key}")
    } else {
        "/config".into()
    }
}

/// Number of qubit arguments a configured gate takes.
fn gate_arity(cfg: &BackendConfiguration, name: &str) -> Option<usize> {
    let g = cfg.gate(name)?;
    if let Some(first) = g.coupling_map.first() {
        return Some(first.len());
    }
    crate::qasm::qasm_def::parse_qasm_def(&g.qasm_def)
        .ok()
        .map(|d| d.args.len())
}

fn builtin_arity(name: &str) -> Option<(usize, usize)> {
    match name {
        "U" | "u3" => Some((1, 3)),
        "u2" => Some((1, 2)),
        "u1" => Some((1, 1)),
        "CX" | "cx" => Some((2, 0)),
        "id" => Some((1, 0)),
        _ => None,
    }
}

/// The effective pulse library: user entries shadow defaults by name.
pub fn effective_library<'a>(
    user: Option<&'a [PulseLibEntry]>,
    defaults: Option<&'a PulseDefaults>,
) -> HashMap<&'a str, &'a PulseLibEntry> {
    let mut lib = HashMap::new();
    if let Some(d) = defaults {
        for p in &d.pulse_library {
            lib.insert(p.name.as_str(), p);
        }
    }
    for p in user.unwrap_or(&[]) {
        lib.insert(p.name.as_str(), p);
    }
    lib
}

pub fn check_pulse_library(lib: &[PulseLibEntry], base: &str, r: &mut ValidationReport) {
    let mut seen = HashSet::new();
    for (i, p) in lib.iter().enumerate() {
        let path = format!("{base}/{i}");
        if RESERVED_PULSE_NAMES.contains(&p.name.as_str()) {
            r.error(format!("{path}/name"), format!("pulse name {:?} is reserved", p.name));
        }
        if !seen.insert(p.name.as_str()) {
            r.error(format!("{path}/name"), format!("duplicate pulse name {:?}", p.name));
        }
        for (k, s) in p.samples.iter().enumerate() {
            if s.norm() > 1.0 + SAMPLE_TOLERANCE {
                r.error(
                    format!("{path}/samples/{k}"),
                    format!("sample magnitude > 1 ({:.6})", s.norm()),
                );
            }
        }
    }
}

struct QobjCheck<'a> {
    q: &'a Qobj,
    cfg: &'a BackendConfiguration,
    defaults: Option<&'a PulseDefaults>,
    opts: Options,
    r: ValidationReport,
}

impl<'a> QobjCheck<'a> {
    fn n_qubits(&self) -> Option<usize> {
        usize::try_from(self.cfg.n_qubits).ok()
    }

    fn qubits(&mut self, qs: &[usize], path: &str) {
        let mut seen = HashSet::new();
        for (k, &q) in qs.iter().enumerate() {
            if let Some(n) = self.n_qubits() {
                if q >= n {
                    self.r.error(
                        format!("{path}/{k}"),
                        format!("qubit {q} out of range (backend has {n})"),
                    );
                }
            }
            if !seen.insert(q) {
                self.r
                    .error(format!("{path}/{k}"), format!("duplicate qubit {q}"));
            }
        }
    }

    fn slots(&mut self, slots: &[usize], limit: usize, what: &str, path: &str) {
        for (k, &s) in slots.iter().enumerate() {
            if s >= limit {
                self.r.error(
                    format!("{path}/{k}"),
                    format!("{what} slot {s} out of range ({limit} available)"),
                );
            }
        }
    }

    fn conditional(&mut self, reg: usize, path: &str) {
        if !self.cfg.conditional {
            self.r
                .error(path, "backend does not support conditional operations");
        } else if reg >= self.cfg.n_registers() {
            self.r.error(
                path,
                format!(
                    "register {reg} out of range ({} available)",
                    self.cfg.n_registers()
                ),
            );
        }
    }

    fn run(mut self) -> ValidationReport {
        let q = self.q;
        if q.kind == QobjType::Pulse && !self.cfg.open_pulse {
            self.r
                .error("/type", "backend does not accept OpenPulse experiments");
        }
        if q.config.shots == Some(0) {
            self.r.error("/config/shots", "shots must be at least 1");
        }
        for i in 0..q.experiments.len() {
            let ec = q.experiment_config(i);
            match q.kind {
                QobjType::Qasm => self.qasm_experiment(i, &ec),
                QobjType::Pulse => self.pulse_experiment(i, &ec),
            }
        }
        self.r
    }

    fn qasm_experiment(&mut self, i: usize, ec: &UserConfig) {
        let base = format!("/experiments/{i}/instructions");
        let mem = ec.memory_slots();
        for (j, ins) in self.q.experiments[i].instructions.iter().enumerate() {
            let p = format!("{base}/{j}");
            match ins {
                Instruction::Gate(g) => {
                    self.gate(g, &p);
                }
                Instruction::Barrier(b) | Instruction::Reset(b) => {
                    self.qubits(&b.qubits, &format!("{p}/qubits"));
                }
                Instruction::Measure(m) => self.measure(m, mem, &p),
                Instruction::Bfunc(b) => self.bfunc(b, mem, &p),
                Instruction::Copy(c) => {
                    self.conditional(c.register_orig, &format!("{p}/register_orig"));
                    let n = self.cfg.n_registers();
                    self.slots(&c.register_copy, n, "register", &format!("{p}/register_copy"));
                }
                Instruction::Snapshot(s) => self.snapshot(s, ec, i, &p),
                other => self.r.error(
                    format!("{p}/name"),
                    format!("{:?} is not a QASM instruction", other.name()),
                ),
            }
        }
    }

    fn gate(&mut self, g: &crate::model::instruction::Gate, p: &str) {
        let cfg = self.cfg;
        let known = cfg.basis_gates.contains(&g.name) || cfg.gate(&g.name).is_some();
        if !known {
            self.r.error(
                format!("{p}/name"),
                format!("gate {:?} is not supported by {}", g.name, cfg.backend_name),
            );
        } else {
            let arity = gate_arity(cfg, &g.name).or(builtin_arity(&g.name).map(|a| a.0));
            if let Some(a) = arity {
                if a != g.qubits.len() {
                    self.r.error(
                        format!("{p}/qubits"),
                        format!("gate {:?} acts on {a} qubit(s), got {}", g.name, g.qubits.len()),
                    );
                }
            }
            let nparams = cfg
                .gate(&g.name)
                .map(|gc| gc.parameters.len())
                .or(builtin_arity(&g.name).map(|a| a.1));
            if let Some(n) = nparams {
                if n != g.params().len() {
                    let at = if g.params.is_some() {
                        format!("{p}/params")
                    } else {
                        p.to_string()
                    };
                    self.r.error(
                        at,
                        format!("gate {:?} takes {n} parameter(s), got {}", g.name, g.params().len()),
                    );
                }
            }
            if let Some(gc) = cfg.gate(&g.name) {
                if !gc.coupling_map.is_empty() && !gc.coupling_map.contains(&g.qubits) {
                    self.r.error(
                        format!("{p}/qubits"),
                        format!("{:?} not in the coupling map of {:?}", g.qubits, g.name),
                    );
                }
            }
        }
        self.qubits(&g.qubits, &format!("{p}/qubits"));
        if let Some(c) = g.conditional {
            let cp = format!("{p}/conditional");
            if cfg.gate(&g.name).and_then(|gc| gc.conditional) == Some(false) {
                self.r
                    .error(&cp, format!("gate {:?} does not support conditionals", g.name));
            }
            self.conditional(c, &cp);
        }
    }

    fn measure(&mut self, m: &crate::model::instruction::Measure, mem: usize, p: &str) {
        self.qubits(&m.qubits, &format!("{p}/qubits"));
        if m.memory.len() != m.qubits.len() {
            self.r
                .error(format!("{p}/memory"), "memory must have the same length as qubits");
        }
        self.slots(&m.memory, mem, "memory", &format!("{p}/memory"));
        if let Some(reg) = &m.register {
            let rp = format!("{p}/register");
            if reg.len() != m.qubits.len() {
                self.r
                    .error(&rp, "register must have the same length as qubits");
            }
            if !self.cfg.conditional {
                self.r
                    .error(&rp, "backend does not support register writes");
            } else {
                let n = self.cfg.n_registers();
                self.slots(reg, n, "register", &rp);
                if self.cfg.pulse.acquisition_latency.is_none() {
                    for (k, (&qb, &rg)) in m.qubits.iter().zip(reg).enumerate() {
                        if rg < n && !self.cfg.register_allowed(qb, rg) {
                            self.r.error(
                                format!("{rp}/{k}"),
                                format!("qubit {qb} cannot store into register {rg}"),
                            );
                        }
                    }
                }
            }
        }
    }

    fn bfunc(&mut self, b: &crate::model::instruction::Bfunc, mem: usize, p: &str) {
        for (key, v) in [("mask", &b.mask), ("val", &b.val)] {
            if !is_hex(v) {
                self.r
                    .error(format!("{p}/{key}"), format!("{v:?} is not a hex string"));
            }
        }
        if b.relation != "==" && b.relation != "!=" {
            self.r.error(
                format!("{p}/relation"),
                format!("relation must be == or !=, got {:?}", b.relation),
            );
        }
        match b.register.single() {
            Some(reg) => self.conditional(reg, &format!("{p}/register")),
            None => self
                .r
                .error(format!("{p}/register"), "bfunc writes exactly one register"),
        }
        if let Some(m) = b.memory {
            if m >= mem {
                self.r.error(
                    format!("{p}/memory"),
                    format!("memory slot {m} out of range ({mem} available)"),
                );
            }
        }
    }

    fn snapshot(&mut self, s: &crate::model::instruction::Snapshot, ec: &UserConfig, i: usize, p: &str) {
        if s.kind != "state" {
            self.r.error(
                format!("{p}/type"),
                format!("unsupported snapshot type {:?}", s.kind),
            );
        }
        if !self.cfg.simulator {
            self.r
                .error(format!("{p}/name"), "snapshots are only available on simulators");
        }
        if ec.shots() > 1 {
            self.r.warning(
                cfg_path(self.q, i, "shots"),
                "snapshot with shots > 1 records the first shot only",
            );
        }
    }

    fn pulse_experiment(&mut self, i: usize, ec: &UserConfig) {
        let cfg = self.cfg;
        let level = ec.meas_level.unwrap_or(2);
        if !cfg.meas_levels().contains(&level) {
            self.r.error(
                cfg_path(self.q, i, "meas_level"),
                format!("meas_level {level} not offered (allowed {:?})", cfg.meas_levels()),
            );
        }
        if level == 2 && ec.meas_return == Some(MeasReturn::Avg) {
            self.r.error(
                cfg_path(self.q, i, "meas_return"),
                "meas_return is fixed to single at meas_level 2",
            );
        }
        if level == 0 && ec.meas_return == Some(MeasReturn::Single) {
            self.r.warning(
                cfg_path(self.q, i, "meas_return"),
                "level 0 is intended for averaged output",
            );
        }
        if ec.memory_slot_size == Some(0) {
            self.r
                .error(cfg_path(self.q, i, "memory_slot_size"), "memory_slot_size must be at least 1");
        }
        self.lo_check(i, "qubit_lo_freq", ec.qubit_lo_freq.as_deref(), cfg.pulse.qubit_lo_range.as_deref());
        self.lo_check(i, "meas_lo_freq", ec.meas_lo_freq.as_deref(), cfg.pulse.meas_lo_range.as_deref());
        if let (Some(rt), Some(allowed)) = (ec.rep_time, cfg.pulse.rep_times.as_ref()) {
            if !allowed.iter().any(|a| (a - rt).abs() < 1e-9) {
                self.r.error(
                    cfg_path(self.q, i, "rep_time"),
                    format!("rep_time {rt} not in {allowed:?}"),
                );
            }
        }
        if let Some(lib) = &ec.pulse_library {
            let base = cfg_path(self.q, i, "pulse_library");
            check_pulse_library(lib, &base, &mut self.r);
        }

        let lib = effective_library(ec.pulse_library.as_deref(), self.defaults);
        let base = format!("/experiments/{i}/instructions");
        let mem = ec.memory_slots();
        let mut last_t0 = 0u64;
        let mut busy_until: HashMap<Channel, u64> = HashMap::new();
        for (j, ins) in self.q.experiments[i].instructions.iter().enumerate() {
            let p = format!("{base}/{j}");
            if let Some(t) = ins.t0() {
                if t < last_t0 {
                    self.r.error(
                        format!("{p}/t0"),
                        format!("t0 {t} precedes an earlier command at {last_t0}"),
                    );
                }
                last_t0 = last_t0.max(t);
            }
            if let Some(ch) = ins.channel() {
                self.channel(ch, &format!("{p}/ch"));
            }
            if let Some(c) = ins.conditional() {
                let cp = format!("{p}/conditional");
                if level != 2 {
                    self.r.error(&cp, "conditional pulses require meas_level 2");
                }
                self.conditional(c, &cp);
            }
            match ins {
                Instruction::Drive(d) => match lib.get(d.name.as_str()) {
                    None => self.r.error(
                        format!("{p}/name"),
                        format!("pulse {:?} not found in the pulse library", d.name),
                    ),
                    Some(entry) => {
                        if let Some(ch) = Channel::parse(&d.ch) {
                            let end = d.t0 + entry.samples.len() as u64;
                            let prev = busy_until.get(&ch).copied().unwrap_or(0);
                            if d.t0 < prev {
                                self.r.error(
                                    format!("{p}/t0"),
                                    format!("pulse on {} overlaps a pulse ending at {prev}", d.ch),
                                );
                            }
                            busy_until.insert(ch, end.max(prev));
                        }
                    }
                },
                Instruction::FrameChange(f) => {
                    if f.phase.as_f64().is_none() {
                        self.r
                            .error(format!("{p}/phase"), "phase must be a number");
                    }
                }
                Instruction::PersistentValue(v) => {
                    if v.val.norm() > 1.0 + SAMPLE_TOLERANCE {
                        self.r
                            .error(format!("{p}/val"), "persistent value magnitude > 1");
                    }
                }
                Instruction::Acquire(a) => self.acquire(a, level, mem, &p),
                Instruction::Snapshot(s) => self.snapshot(s, ec, i, &p),
                Instruction::Bfunc(b) => {
                    if level != 2 {
                        self.r
                            .error(format!("{p}/name"), "bfunc in a pulse experiment requires meas_level 2");
                    }
                    self.bfunc(b, mem, &p);
                }
                Instruction::Copy(c) => {
                    if level != 2 {
                        self.r
                            .error(format!("{p}/name"), "copy in a pulse experiment requires meas_level 2");
                    }
                    self.conditional(c.register_orig, &format!("{p}/register_orig"));
                    let n = self.cfg.n_registers();
                    self.slots(&c.register_copy, n, "register", &format!("{p}/register_copy"));
                }
                other => self.r.error(
                    format!("{p}/name"),
                    format!("{:?} is not a pulse instruction", other.name()),
                ),
            }
        }
    }

    fn lo_check(&mut self, i: usize, key: &str, freqs: Option<&[f64]>, ranges: Option<&[[f64; 2]]>) {
        let Some(freqs) = freqs else { return };
        let base = cfg_path(self.q, i, key);
        if let Some(n) = self.n_qubits() {
            if freqs.len() != n {
                self.r
                    .error(&base, format!("expected {n} frequencies, got {}", freqs.len()));
            }
        }
        let Some(ranges) = ranges else { return };
        for (k, f) in freqs.iter().enumerate() {
            if let Some([lo, hi]) = ranges.get(k) {
                if f < lo || f > hi {
                    self.r.error(
                        format!("{base}/{k}"),
                        format!("{f} GHz outside [{lo}, {hi}]"),
                    );
                }
            }
        }
    }

    fn channel(&mut self, ch: &str, path: &str) {
        let Some(c) = Channel::parse(ch) else {
            self.r
                .error(path, format!("{ch:?} is not a channel (d<k>, m<k> or u<k>)"));
            return;
        };
        let limit = match c.kind {
            ChannelKind::Drive | ChannelKind::Measure => self.n_qubits(),
            ChannelKind::Control => Some(self.cfg.n_uchannels()),
        };
        if let Some(n) = limit {
            if c.index >= n {
                self.r
                    .error(path, format!("channel {ch} does not exist on this backend"));
            }
        }
    }

    fn acquire(&mut self, a: &crate::model::instruction::Acquire, level: u8, mem: usize, p: &str) {
        let cfg = self.cfg;
        let Some(qubits) = &a.qubits else {
            self.r.error(p, "acquire requires qubits");
            return;
        };
        self.qubits(qubits, &format!("{p}/qubits"));
        match &a.memory_slot {
            None => self.r.error(p, "acquire requires memory_slot"),
            Some(ms) => {
                if ms.len() != qubits.len() {
                    self.r.error(
                        format!("{p}/memory_slot"),
                        "memory_slot must have the same length as qubits",
                    );
                }
                self.slots(ms, mem, "memory", &format!("{p}/memory_slot"));
            }
        }
        if let Some(rs) = &a.register_slot {
            let rp = format!("{p}/register_slot");
            if !cfg.conditional || level != 2 {
                self.r.error(
                    &rp,
                    "register_slot requires a conditional backend and meas_level 2",
                );
            }
            if rs.len() != qubits.len() {
                self.r
                    .error(&rp, "register_slot must have the same length as qubits");
            }
            let n = cfg.n_registers();
            self.slots(rs, n, "register", &rp);
        }
        let kernels = cfg.pulse.meas_kernels.as_deref().unwrap_or(&[]);
        for (k, spec) in a.kernels.iter().flatten().enumerate() {
            if !kernels.contains(&spec.name) {
                self.r.error(
                    format!("{p}/kernels/{k}/name"),
                    format!("kernel {:?} not offered by the backend", spec.name),
                );
            }
        }
        let discs = cfg.pulse.discriminators.as_deref().unwrap_or(&[]);
        for (k, spec) in a.discriminators.iter().flatten().enumerate() {
            if !discs.contains(&spec.name) {
                self.r.error(
                    format!("{p}/discriminators/{k}/name"),
                    format!("discriminator {:?} not offered by the backend", spec.name),
                );
            }
        }
        if let Some(groups) = &cfg.pulse.meas_map {
            let set: BTreeSet<usize> = qubits.iter().copied().collect();
            for g in groups {
                let inside = g.iter().filter(|q| set.contains(q)).count();
                if inside > 0 && inside < g.len() {
                    let msg = format!("acquire splits multiplexed group {g:?}");
                    if self.opts.strict {
                        self.r.error(format!("{p}/qubits"), msg);
                    } else {
                        self.r.warning(format!("{p}/qubits"), msg);
                    }
                }
            }
        }
    }
}

/// Checks a Qobj against a backend. Unknown fields from a lenient parse are
/// reported as warnings.
pub fn validate_qobj(
    q: &Parsed<Qobj>,
    cfg: &BackendConfiguration,
    defaults: Option<&PulseDefaults>,
    opts: Options,
) -> ValidationReport {
    let r = QobjCheck {
        q,
        cfg,
        defaults,
        opts,
        r: ValidationReport::default(),
    }
    .run();
    let mut out = ValidationReport::default();
    out.add_unknown(q);
    out.extend(r);
    out
}

fn check_range_list(ranges: Option<&[[f64; 2]]>, key: &str, r: &mut ValidationReport) {
    for (k, [lo, hi]) in ranges.into_iter().flatten().enumerate() {
        if lo > hi {
            r.error(format!("/{key}/{k}"), format!("range low {lo} exceeds high {hi}"));
        }
    }
}

/// Checks the OpenPulse configuration fields. `n_qubits` is `None` for
/// fragments that carry no device size.
pub fn validate_pulse_fields(p: &PulseConfigFields, n_qubits: Option<usize>) -> ValidationReport {
    let mut r = ValidationReport::default();
    if let (Some(lo), Some(n)) = (&p.u_channel_lo, p.n_uchannels) {
        // an empty list means every U channel runs at zero LO
        if !lo.is_empty() && lo.len() != n {
            r.error(
                "/u_channel_lo",
                format!("expected {n} entries (n_uchannels), got {}", lo.len()),
            );
        }
    }
    if let (Some(lo), Some(n)) = (&p.u_channel_lo, n_qubits) {
        for (u, terms) in lo.iter().enumerate() {
            for (k, t) in terms.iter().enumerate() {
                if t.q >= n {
                    r.error(format!("/u_channel_lo/{u}/{k}/q"), format!("qubit {} out of range", t.q));
                }
            }
        }
    }
    for (k, lvl) in p.meas_levels.iter().flatten().enumerate() {
        if *lvl > 2 {
            r.error(format!("/meas_levels/{k}"), format!("unknown measurement level {lvl}"));
        }
    }
    check_range_list(p.qubit_lo_range.as_deref(), "qubit_lo_range", &mut r);
    check_range_list(p.meas_lo_range.as_deref(), "meas_lo_range", &mut r);
    check_range_list(p.channel_bandwidth.as_deref(), "channel_bandwidth", &mut r);
    for (key, v) in [("dt", p.dt), ("dtm", p.dtm)] {
        if v.is_some_and(|x| x <= 0.0) {
            r.error(format!("/{key}"), "sample period must be positive");
        }
    }
    if let Some(groups) = &p.meas_map {
        let mut seen = HashSet::new();
        for (g, group) in groups.iter().enumerate() {
            for (k, q) in group.iter().enumerate() {
                if !seen.insert(*q) {
                    r.error(format!("/meas_map/{g}/{k}"), format!("qubit {q} in more than one group"));
                }
                if n_qubits.is_some_and(|n| *q >= n) {
                    r.error(format!("/meas_map/{g}/{k}"), format!("qubit {q} out of range"));
                }
            }
        }
    }
    r
}

fn is_semver(s: &str) -> bool {
    let parts: Vec<_> = s.split('.').collect();
    parts.len() == 3
        && parts
            .iter()
            .all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
}

pub fn validate_configuration(cfg: &BackendConfiguration) -> ValidationReport {
    let mut r = ValidationReport::default();
    let n = usize::try_from(cfg.n_qubits).ok();
    if cfg.n_qubits < -1 {
        r.error("/n_qubits", "n_qubits must be -1 or non-negative");
    }
    if !is_semver(&cfg.backend_version) {
        r.error("/backend_version", "expected a version of the form X.X.X");
    }
    if let Some(d) = &cfg.online_date {
        if parse_iso8601(d).is_none() {
            r.error("/online_date", "not an ISO 8601 date");
        }
    }
    for (k, b) in cfg.basis_gates.iter().enumerate() {
        if cfg.gate(b).is_none() {
            r.error(format!("/basis_gates/{k}"), format!("basis gate {b:?} has no gate entry"));
        }
    }
    for (k, g) in cfg.gates.iter().enumerate() {
        let p = format!("/gates/{k}");
        if !cfg.basis_gates.contains(&g.name) {
            r.error(format!("{p}/name"), format!("gate {:?} missing from basis_gates", g.name));
        }
        if let Some(first) = g.coupling_map.first() {
            for (c, e) in g.coupling_map.iter().enumerate() {
                if e.len() != first.len() {
                    r.error(format!("{p}/coupling_map/{c}"), "coupling entries must have equal arity");
                }
                for (x, q) in e.iter().enumerate() {
                    if n.is_some_and(|n| *q >= n) {
                        r.error(format!("{p}/coupling_map/{c}/{x}"), format!("qubit {q} out of range"));
                    }
                }
            }
        }
        if let Err(e) = crate::qasm::qasm_def::parse_qasm_def(&g.qasm_def) {
            r.error(format!("{p}/qasm_def"), e.to_string());
        }
        if let (Some(lm), Some(nr)) = (&g.latency_map, cfg.n_registers) {
            for (row, entries) in lm.iter().enumerate() {
                if entries.len() != nr {
                    r.error(
                        format!("{p}/latency_map/{row}"),
                        format!("expected {nr} entries (n_registers), got {}", entries.len()),
                    );
                }
            }
        }
    }
    for (k, pair) in cfg.coupling_map.iter().flatten().enumerate() {
        for (x, q) in pair.iter().enumerate() {
            if n.is_some_and(|n| *q >= n) {
                r.error(format!("/coupling_map/{k}/{x}"), format!("qubit {q} out of range"));
            }
        }
    }
    if cfg.conditional {
        match (cfg.n_registers, &cfg.register_map) {
            (None, _) => r.error("", "n_registers is required when conditional is true"),
            (_, None) => r.error("", "register_map is required when conditional is true"),
            (Some(nr), Some(map)) => {
                if n.is_some_and(|n| map.len() != n) {
                    r.error("/register_map", "register_map needs one row per qubit");
                }
                for (row, entries) in map.iter().enumerate() {
                    if entries.len() != nr {
                        r.error(format!("/register_map/{row}"), format!("expected {nr} entries"));
                    }
                    for (c, b) in entries.iter().enumerate() {
                        if *b > 1 {
                            r.error(format!("/register_map/{row}/{c}"), "entries must be 0 or 1");
                        }
                    }
                }
            }
        }
    }
    if cfg.open_pulse {
        let p = &cfg.pulse;
        for (key, present) in [
            ("n_uchannels", p.n_uchannels.is_some()),
            ("meas_levels", p.meas_levels.is_some()),
            ("dt", p.dt.is_some()),
        ] {
            if !present {
                r.error("", format!("{key} is required when open_pulse is true"));
            }
        }
        r.extend(validate_pulse_fields(p, n));
    }
    r
}

pub fn validate_defaults(d: &PulseDefaults, cfg: Option<&BackendConfiguration>) -> ValidationReport {
    let mut r = ValidationReport::default();
    check_pulse_library(&d.pulse_library, "/pulse_library", &mut r);
    let n = cfg.and_then(|c| usize::try_from(c.n_qubits).ok());
    if let Some(n) = n {
        if d.qubit_freq_est.len() != n {
            r.error("/qubit_freq_est", format!("expected {n} entries, got {}", d.qubit_freq_est.len()));
        }
    }
    let lib: HashSet<&str> = d.pulse_library.iter().map(|p| p.name.as_str()).collect();
    for (k, entry) in d.cmd_def.iter().enumerate() {
        let p = format!("/cmd_def/{k}");
        if let Some(c) = cfg {
            if entry.name != "measure" && !c.basis_gates.contains(&entry.name) {
                r.error(format!("{p}/name"), format!("{:?} is not a basis gate", entry.name));
            }
        }
        for (x, q) in entry.qubits.iter().enumerate() {
            if n.is_some_and(|n| *q >= n) {
                r.error(format!("{p}/qubits/{x}"), format!("qubit {q} out of range"));
            }
        }
        let key = if entry.sequence.is_some() { "sequence" } else { "instructions" };
        for (j, ins) in entry.commands().iter().enumerate() {
            let ip = format!("{p}/{key}/{j}");
            match ins {
                Instruction::Drive(dp) if !lib.contains(dp.name.as_str()) => {
                    r.error(format!("{ip}/name"), format!("pulse {:?} not in the default library", dp.name));
                }
                Instruction::Drive(_)
                | Instruction::FrameChange(_)
                | Instruction::PersistentValue(_)
                | Instruction::Acquire(_) => {}
                other => r.error(
                    format!("{ip}/name"),
                    format!("{:?} cannot appear in a command definition", other.name()),
                ),
            }
            if let Some(ch) = ins.channel() {
                if Channel::parse(ch).is_none() {
                    r.error(format!("{ip}/ch"), format!("{ch:?} is not a channel"));
                }
            }
        }
    }
    r
}

pub fn validate_properties(p: &BackendProperties, cfg: Option<&BackendConfiguration>) -> ValidationReport {
    let mut r = ValidationReport::default();
    let date = |path: String, d: &str, r: &mut ValidationReport| {
        if parse_iso8601(d).is_none() {
            r.error(path, "not an ISO 8601 date");
        }
    };
    date("/last_update_date".into(), &p.last_update_date, &mut r);
    for (k, g) in p.gates.iter().enumerate() {
        if let Some(c) = cfg {
            if !c.basis_gates.contains(&g.gate) {
                r.error(format!("/gates/{k}/gate"), format!("{:?} is not a basis gate", g.gate));
            }
        }
        for (x, nd) in g.parameters.iter().enumerate() {
            date(format!("/gates/{k}/parameters/{x}/date"), &nd.date, &mut r);
        }
    }
    for (q, list) in p.qubits.iter().enumerate() {
        for (x, nd) in list.iter().enumerate() {
            date(format!("/qubits/{q}/{x}/date"), &nd.date, &mut r);
        }
    }
    for (x, nd) in p.general.iter().enumerate() {
        date(format!("/general/{x}/date"), &nd.date, &mut r);
    }
    r
}

/// JSON pointer for an object key under `base`.
pub fn child(base: &str, key: &str) -> String {
    format!("{base}/{}", escape_token(key))
}
