//! Compiles QASM experiments to pulse schedules through a backend's cmd_def.
//!
//! Each command starts at the latest clock among the lanes it touches: the
//! channels named in its sequence, plus `d<q>`, `m<q>` and the acquisition
//! lane of each of its qubits. Those lanes then advance to the command's
//! end, plus the default buffer when the command has nonzero duration.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::instruction::{Acquire, Measure, ParamValue};
use crate::model::{BackendConfiguration, Channel, CmdDefEntry, Experiment, Instruction, PulseDefaults, Qobj, QobjType, UserConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoweringError {
    #[error("instruction {index}: no cmd_def entry for {name} on qubits {qubits:?}")]
    MissingCmdDef {
        index: usize,
        name: String,
        qubits: Vec<usize>,
    },
    #[error("cmd_def {name}: parameter token {token:?} has no value ({given} given)")]
    MissingParameter { name: String, token: String, given: usize },
    #[error("instruction {index}: conditional {name} lowers to {command}, which cannot be conditioned")]
    ConditionalOnUnsupportedChannel {
        index: usize,
        name: String,
        command: String,
    },
    #[error("cmd_def {name}: bad channel {channel:?}")]
    BadChannel { name: String, channel: String },
    #[error("qobj is not of type QASM")]
    NotQasm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Lane {
    Ch(Channel),
    Acquire(usize),
}

/// cmd_def index, pulse lengths and buffer of one backend.
#[derive(Debug, Clone)]
pub struct LoweringContext<'a> {
    defaults: &'a PulseDefaults,
    buffer: u64,
    lengths: HashMap<String, u64>,
    /// Qubits referenced by each control channel's LO formula.
    u_refs: Vec<Vec<usize>>,
}

impl<'a> LoweringContext<'a> {
    pub fn new(cfg: &BackendConfiguration, defaults: &'a PulseDefaults) -> LoweringContext<'a> {
        let lengths = defaults
            .pulse_library
            .iter()
            .map(|p| (p.name.clone(), p.samples.len() as u64))
            .collect();
        let u_refs = cfg
            .pulse
            .u_channel_lo
            .as_ref()
            .map(|u| u.iter().map(|terms| terms.iter().map(|t| t.q).collect()).collect())
            .unwrap_or_default();
        LoweringContext {
            defaults,
            buffer: defaults.buffer,
            lengths,
            u_refs,
        }
    }

    /// Adds user pulse-library entries, which take precedence.
    pub fn with_user_library(mut self, user: &UserConfig) -> Self {
        for p in user.pulse_library.iter().flatten() {
            self.lengths.insert(p.name.clone(), p.samples.len() as u64);
        }
        self
    }

    fn duration(&self, ins: &Instruction) -> u64 {
        match ins {
            Instruction::Drive(d) => d.t0 + self.lengths.get(&d.name).copied().unwrap_or(0),
            Instruction::Acquire(a) => a.t0 + a.duration,
            other => other.t0().unwrap_or(0),
        }
    }
}

/// Replaces every `Pk` phase token by `actuals[k]`.
pub fn substitute_params(entry: &CmdDefEntry, actuals: &[f64]) -> Result<Vec<Instruction>, LoweringError> {
    let mut out = entry.commands().to_vec();
    for ins in &mut out {
        if let Instruction::FrameChange(f) = ins {
            if let ParamValue::Token(tok) = &f.phase {
                let v = f
                    .phase
                    .token()
                    .and_then(|(sign, k)| actuals.get(k).map(|a| sign * a))
                    .ok_or_else(|| LoweringError::MissingParameter {
                        name: entry.name.clone(),
                        token: tok.clone(),
                        given: actuals.len(),
                    })?;
                f.phase = ParamValue::Value(v);
            }
        }
    }
    Ok(out)
}

/// Measured qubits, memory slots and optional register slots.
type MeasureSlots<'s> = (&'s [usize], &'s [usize], Option<&'s [usize]>);

struct Scheduler<'c, 'a> {
    ctx: &'c LoweringContext<'a>,
    clocks: HashMap<Lane, u64>,
    out: Vec<(u64, Instruction)>,
}

impl Scheduler<'_, '_> {
    fn now(&self) -> u64 {
        self.clocks.values().copied().max().unwrap_or(0)
    }

    fn qubit_lanes(&self, q: usize) -> [Lane; 3] {
        [Lane::Ch(Channel::drive(q)), Lane::Ch(Channel::measure(q)), Lane::Acquire(q)]
    }

    fn place(
        &mut self,
        index: usize,
        entry: &CmdDefEntry,
        mut seq: Vec<Instruction>,
        conditional: Option<usize>,
        measure: Option<MeasureSlots<'_>>,
    ) -> Result<(), LoweringError> {
        let mut lanes: Vec<Lane> = entry.qubits.iter().flat_map(|&q| self.qubit_lanes(q)).collect();
        for ins in &seq {
            if let Some(ch) = ins.channel() {
                let c = Channel::parse(ch).ok_or_else(|| LoweringError::BadChannel {
                    name: entry.name.clone(),
                    channel: ch.to_string(),
                })?;
                lanes.push(Lane::Ch(c));
            }
        }
        let start = lanes.iter().map(|l| self.clocks.get(l).copied().unwrap_or(0)).max().unwrap_or(0);
        let duration = seq.iter().map(|i| self.ctx.duration(i)).max().unwrap_or(0);
        for ins in &mut seq {
            if let Some(k) = conditional {
                match ins {
                    Instruction::Drive(d) => d.conditional = Some(k),
                    Instruction::FrameChange(f) => f.conditional = Some(k),
                    other => {
                        return Err(LoweringError::ConditionalOnUnsupportedChannel {
                            index,
                            name: entry.name.clone(),
                            command: other.name().to_string(),
                        })
                    }
                }
            }
            if let (Instruction::Acquire(a), Some((qubits, memory, register))) = (&mut *ins, measure) {
                thread_measure(a, qubits, memory, register);
            }
            let t = ins.t0().unwrap_or(0) + start;
            ins.set_t0(t);
            self.out.push((t, ins.clone()));
        }
        let end = start + duration + if duration > 0 { self.ctx.buffer } else { 0 };
        for l in lanes {
            self.clocks.insert(l, end);
        }
        Ok(())
    }

    fn barrier(&mut self, qubits: &[usize]) {
        let mut lanes: Vec<Lane> = qubits.iter().flat_map(|&q| self.qubit_lanes(q)).collect();
        for (u, refs) in self.ctx.u_refs.iter().enumerate() {
            if refs.iter().any(|q| qubits.contains(q)) {
                lanes.push(Lane::Ch(Channel::control(u)));
            }
        }
        let t = lanes.iter().map(|l| self.clocks.get(l).copied().unwrap_or(0)).max().unwrap_or(0);
        for l in lanes {
            self.clocks.insert(l, t);
        }
    }
}

fn thread_measure(a: &mut Acquire, qubits: &[usize], memory: &[usize], register: Option<&[usize]>) {
    a.qubits = Some(qubits.to_vec());
    a.memory_slot = Some(memory.to_vec());
    a.register_slot = register.map(<[usize]>::to_vec);
}

/// Lowers one experiment. Classical instructions pass through unchanged.
pub fn lower_experiment(exp: &Experiment, ctx: &LoweringContext) -> Result<Experiment, LoweringError> {
    let mut s = Scheduler {
        ctx,
        clocks: HashMap::new(),
        out: Vec::new(),
    };
    let missing = |index: usize, name: &str, qubits: &[usize]| LoweringError::MissingCmdDef {
        index,
        name: name.to_string(),
        qubits: qubits.to_vec(),
    };
    for (index, ins) in exp.instructions.iter().enumerate() {
        match ins {
            Instruction::Gate(g) => {
                let entry = ctx.defaults.cmd(&g.name, &g.qubits).ok_or_else(|| missing(index, &g.name, &g.qubits))?;
                let seq = substitute_params(entry, g.params())?;
                s.place(index, entry, seq, g.conditional, None)?;
            }
            Instruction::Measure(Measure { qubits, memory, register }) => {
                if let Some(entry) = ctx.defaults.cmd("measure", qubits) {
                    let seq = substitute_params(entry, &[])?;
                    s.place(index, entry, seq, None, Some((qubits, memory, register.as_deref())))?;
                } else {
                    for (j, &q) in qubits.iter().enumerate() {
                        let entry = ctx.defaults.cmd("measure", &[q]).ok_or_else(|| missing(index, "measure", qubits))?;
                        let seq = substitute_params(entry, &[])?;
                        let mem = &memory[j..=j];
                        let reg = register.as_ref().map(|r| &r[j..=j]);
                        s.place(index, entry, seq, None, Some((&qubits[j..=j], mem, reg)))?;
                    }
                }
            }
            Instruction::Barrier(b) => s.barrier(&b.qubits),
            Instruction::Reset(r) => {
                let entry = ctx.defaults.cmd("reset", &r.qubits).ok_or_else(|| missing(index, "reset", &r.qubits))?;
                let seq = substitute_params(entry, &[])?;
                s.place(index, entry, seq, None, None)?;
            }
            other => {
                let t = s.now();
                s.out.push((t, other.clone()));
            }
        }
    }
    let mut out = s.out;
    out.sort_by_key(|(t, _)| *t);
    Ok(Experiment {
        header: exp.header.clone(),
        config: exp.config.clone(),
        instructions: out.into_iter().map(|(_, i)| i).collect(),
    })
}

/// Lowers a whole QASM job to a PULSE job measured at level 2.
pub fn lower_qobj(q: &Qobj, cfg: &BackendConfiguration, defaults: &PulseDefaults) -> Result<Qobj, LoweringError> {
    if q.kind != QobjType::Qasm {
        return Err(LoweringError::NotQasm);
    }
    let ctx = LoweringContext::new(cfg, defaults).with_user_library(&q.config);
    let experiments = q
        .experiments
        .iter()
        .map(|e| lower_experiment(e, &ctx))
        .collect::<Result<_, _>>()?;
    let mut config = q.config.clone();
    config.meas_level = Some(2);
    config.qubit_lo_freq.get_or_insert_with(|| defaults.qubit_freq_est.clone());
    config.meas_lo_freq.get_or_insert_with(|| defaults.meas_freq_est.clone());
    if config.rep_time.is_none() {
        config.rep_time = cfg.pulse.rep_times.as_ref().and_then(|r| r.first().copied());
    }
    Ok(Qobj {
        qobj_id: q.qobj_id.clone(),
        kind: QobjType::Pulse,
        schema_version: q.schema_version.clone(),
        experiments,
        header: q.header.clone(),
        config,
    })
}
