//! Shot loop for PULSE experiments.
//!
//! Per sample `t` a shot: starts acquisitions at `t` (projective sample),
//! finishes acquisitions ending at `t` (signal, kernel, discriminator,
//! memory and register writes), runs classical ops and snapshots scheduled
//! at `t`, then reads every channel and propagates across the sample.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64 as C64;
use serde_json::{Map, Value};

use super::measure::{apply_kernel, assemble_pulse_result, discriminate, level0_signal, measure_subsystem, ShotRecord};
use super::propagate::Propagator;
use super::timeline::{build_timelines, ChannelLimits, ChannelTimeline};
use super::EmulatorParams;
use crate::error::EngineError;
use crate::hamiltonian::{u_channel_frequency, EvaluatedHamiltonian};
use crate::model::instruction::{Acquire, KernelSpec};
use crate::model::result::{ExperimentResult, Shots};
use crate::model::validate::effective_library;
use crate::model::{BackendConfiguration, Channel, ChannelKind, Experiment, Instruction, MeasReturn, PulseDefaults, UserConfig};
use crate::qasm::engine::ClassicalState;
use crate::rng::shot_rng;

pub struct PulseContext<'a> {
    pub cfg: &'a BackendConfiguration,
    pub defaults: Option<&'a PulseDefaults>,
    pub hamiltonian: &'a EvaluatedHamiltonian,
    pub params: &'a EmulatorParams,
    pub cancel: Option<&'a AtomicBool>,
}

struct AcquirePlan<'a> {
    acq: &'a Acquire,
    kernels: Vec<KernelSpec>,
    discriminator: KernelSpec,
    /// Samples at `dtm` spacing covering the window.
    window: usize,
}

enum Timed<'a> {
    Classical(&'a Instruction),
    Snapshot(&'a str),
}

fn default_kernel(d: Option<&PulseDefaults>) -> KernelSpec {
    d.and_then(|d| d.meas_kernel.clone()).unwrap_or(KernelSpec {
        name: "boxcar".into(),
        params: None,
    })
}

fn default_discriminator(d: Option<&PulseDefaults>) -> KernelSpec {
    d.and_then(|d| d.discriminator.clone()).unwrap_or(KernelSpec {
        name: "max_1Q_fidelity".into(),
        params: None,
    })
}

fn carrier(ch: Channel, cfg: &BackendConfiguration, qubit_lo: &[f64], meas_lo: &[f64]) -> Result<f64, EngineError> {
    let missing = || EngineError::Invalid(format!("no LO frequency for channel {ch}"));
    let ghz = match ch.kind {
        ChannelKind::Drive => *qubit_lo.get(ch.index).ok_or_else(missing)?,
        ChannelKind::Measure => *meas_lo.get(ch.index).ok_or_else(missing)?,
        ChannelKind::Control => match cfg.pulse.u_channel_lo.as_ref().and_then(|u| u.get(ch.index)) {
            Some(spec) => u_channel_frequency(spec, qubit_lo)?,
            None => 0.0,
        },
    };
    Ok(2.0 * PI * ghz)
}

pub fn run_experiment(
    exp: &Experiment,
    ec: &UserConfig,
    ctx: &PulseContext,
    exp_index: usize,
    seed: u64,
) -> Result<ExperimentResult, EngineError> {
    let cfg = ctx.cfg;
    let h = ctx.hamiltonian;
    if let Some(ch) = h.nonlinear.first() {
        return Err(EngineError::NonlinearDriveUnsupported(ch.clone()));
    }
    let meas_level = ec.meas_level.unwrap_or(2);
    let meas_return = ec.meas_return.unwrap_or(MeasReturn::Avg);
    let dt = cfg.pulse.dt.unwrap_or(1.0);
    let dtm = cfg.pulse.dtm.unwrap_or(dt);
    let n_qubits = cfg.n_qubits.max(0) as usize;
    let limits = ChannelLimits {
        n_qubits,
        n_uchannels: cfg.n_uchannels(),
    };
    let lib = effective_library(ec.pulse_library.as_deref(), ctx.defaults);
    let timelines = build_timelines(&exp.instructions, &lib, limits)?;

    let qubit_lo = ec
        .qubit_lo_freq
        .clone()
        .or_else(|| ctx.defaults.map(|d| d.qubit_freq_est.clone()))
        .unwrap_or_default();
    let meas_lo = ec
        .meas_lo_freq
        .clone()
        .or_else(|| ctx.defaults.map(|d| d.meas_freq_est.clone()))
        .unwrap_or_default();
    let mut carriers = Vec::new();
    for name in h.drives.keys() {
        let ch = Channel::parse(name).ok_or_else(|| EngineError::Invalid(format!("bad channel {name} in Hamiltonian")))?;
        carriers.push((ch, carrier(ch, cfg, &qubit_lo, &meas_lo)?));
    }
    let prop = Propagator::new(
        h,
        &carriers,
        ctx.params.drive_scale,
        dt,
        2.0 * PI * ctx.params.rwa_cutoff_ghz,
    )?;
    let coupled: Vec<Option<&ChannelTimeline>> = prop.channels().iter().map(|c| timelines.get(c)).collect();

    // Acquisitions, classical ops and snapshots.
    let mut acquires = Vec::new();
    let mut timed: Vec<(u64, Timed)> = Vec::new();
    let mut horizon = 0u64;
    for (index, ins) in exp.instructions.iter().enumerate() {
        match ins {
            Instruction::Acquire(a) => {
                for &q in a.qubits() {
                    if q >= n_qubits {
                        return Err(EngineError::BadChannel {
                            index,
                            channel: format!("qubit {q}"),
                        });
                    }
                }
                if let Some(regs) = &a.register_slot {
                    if meas_level != 2 {
                        return Err(EngineError::RegisterWriteWithoutLevel2 { index });
                    }
                    if let Some(&r) = regs.iter().find(|&&r| r >= cfg.n_registers()) {
                        return Err(EngineError::RegisterOutOfRange { index, register: r });
                    }
                }
                if let Some(&m) = a.memory_slot().iter().find(|&&m| m >= ec.memory_slots()) {
                    return Err(EngineError::ShapeMismatch(format!("instruction {index}: memory slot {m} out of range")));
                }
                let kernels = match &a.kernels {
                    Some(k) if !k.is_empty() => k.clone(),
                    _ => vec![default_kernel(ctx.defaults)],
                };
                let discriminator = match &a.discriminators {
                    Some(d) if !d.is_empty() => d[0].clone(),
                    _ => default_discriminator(ctx.defaults),
                };
                let window = ((a.duration as f64 * dt / dtm) + 1e-9).floor().max(1.0) as usize;
                acquires.push(AcquirePlan {
                    acq: a,
                    kernels,
                    discriminator,
                    window,
                });
                horizon = horizon.max(a.t0 + a.duration);
            }
            Instruction::Bfunc(_) | Instruction::Copy(_) => {
                if meas_level != 2 {
                    return Err(EngineError::RegisterWriteWithoutLevel2 { index });
                }
                timed.push((horizon, Timed::Classical(ins)));
            }
            Instruction::Snapshot(s) => {
                timed.push((s.t0.unwrap_or(horizon), Timed::Snapshot(&s.label)));
            }
            Instruction::Drive(d) => {
                let len = lib.get(d.name.as_str()).map_or(0, |p| p.samples.len() as u64);
                horizon = horizon.max(d.t0 + len);
            }
            other => horizon = horizon.max(other.t0().unwrap_or(0)),
        }
    }
    let t_end = timelines
        .values()
        .map(ChannelTimeline::end)
        .chain(timed.iter().map(|(t, _)| *t))
        .chain(acquires.iter().map(|a| a.acq.t0 + a.acq.duration))
        .max()
        .unwrap_or(0);

    let slots = ec.memory_slots();
    let slot_size = match ec.memory_slot_size {
        Some(l) if meas_level == 0 => l,
        _ if meas_level == 0 => acquires.first().map_or(1, |a| a.window),
        _ => 0,
    };
    let dims = h.layout.dims();
    let shots = ec.shots();
    let mut records = Vec::with_capacity(shots as usize);
    let mut snapshots = Map::new();

    for shot in 0..shots {
        if ctx.cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(EngineError::Cancelled);
        }
        let mut rng = shot_rng(seed, exp_index, shot);
        let mut psi = prop.ground();
        let mut cl = ClassicalState::new(slots, cfg.n_registers());
        let mut rec = ShotRecord::zeros(slots, slot_size);
        let mut cursors: Vec<_> = timelines.values().map(|t| (t.channel, t.cursor())).collect();
        let mut history: Vec<Vec<C64>> = vec![Vec::with_capacity(t_end as usize); cursors.len()];
        let mut pending: Vec<(usize, Vec<bool>)> = Vec::new();
        let mut amps = vec![C64::default(); coupled.len()];

        for t in 0..=t_end {
            for (i, a) in acquires.iter().enumerate().filter(|(_, a)| a.acq.t0 == t) {
                let bits = a
                    .acq
                    .qubits()
                    .iter()
                    .map(|&q| measure_subsystem(psi.as_mut_slice(), &dims, q, &mut rng))
                    .collect();
                pending.push((i, bits));
            }
            let (done, rest): (Vec<_>, Vec<_>) = pending
                .into_iter()
                .partition(|(i, _)| acquires[*i].acq.t0 + acquires[*i].acq.duration == t);
            pending = rest;
            for (i, bits) in done {
                let a = &acquires[i];
                let mut iqs = Vec::with_capacity(bits.len());
                for (j, (&q, &bit)) in a.acq.qubits().iter().zip(&bits).enumerate() {
                    let m = Channel {
                        kind: ChannelKind::Measure,
                        index: q,
                    };
                    let stim = cursors
                        .iter()
                        .position(|(c, _)| *c == m)
                        .map(|p| &history[p][a.acq.t0 as usize..(a.acq.t0 + a.acq.duration) as usize])
                        .unwrap_or(&[]);
                    let n = a.window.max(slot_size);
                    let sig = level0_signal(stim, dt, dtm, n, bit, ctx.params.iq_noise_sigma, &mut rng);
                    let kernel = a.kernels.get(j).unwrap_or(&a.kernels[0]);
                    let iq = apply_kernel(kernel, &sig[..a.window])?;
                    if let Some(&slot) = a.acq.memory_slot().get(j) {
                        rec.level0[slot] = sig[..slot_size].to_vec();
                        rec.level1[slot] = iq;
                    }
                    iqs.push(iq);
                }
                if meas_level == 2 {
                    let out = discriminate(&a.discriminator, &iqs)?;
                    for (j, b) in out.iter().enumerate() {
                        if let Some(&slot) = a.acq.memory_slot().get(j) {
                            rec.bits[slot] = *b;
                            cl.memory[slot] = *b;
                        }
                        if let Some(&r) = a.acq.register_slot.as_ref().and_then(|r| r.get(j)) {
                            cl.registers[r] = *b;
                        }
                    }
                }
            }
            for (_, item) in timed.iter().filter(|(at, _)| *at == t) {
                match item {
                    Timed::Classical(Instruction::Bfunc(b)) => cl.apply_bfunc(b),
                    Timed::Classical(Instruction::Copy(c)) => cl.apply_copy(c),
                    Timed::Classical(_) => {}
                    Timed::Snapshot(label) => {
                        if shot == 0 {
                            let v: Vec<C64> = psi.iter().copied().collect();
                            snapshots.insert(label.to_string(), serde_json::to_value(v).expect("complex serializes"));
                        }
                    }
                }
            }
            if t == t_end {
                break;
            }
            let reg = |r: usize| cl.condition(r);
            for (k, (_, c)) in cursors.iter_mut().enumerate() {
                history[k].push(c.sample(t, &reg));
            }
            for (slot, tl) in amps.iter_mut().zip(&coupled) {
                *slot = match tl {
                    Some(tl) => {
                        let k = cursors.iter().position(|(c, _)| *c == tl.channel).expect("cursor per timeline");
                        history[k][t as usize]
                    }
                    None => C64::default(),
                };
            }
            prop.step(&mut psi, t, &amps);
        }
        records.push(rec);
    }

    let mut data = assemble_pulse_result(&records, meas_level, meas_return, slots, slot_size)?;
    if !snapshots.is_empty() {
        let mut by_type = Map::new();
        by_type.insert("state".into(), Value::Object(snapshots));
        data.snapshots = Some(by_type);
    }
    Ok(ExperimentResult {
        shots: Shots::Count(shots),
        status: Some("DONE".into()),
        success: true,
        header: exp.header.clone(),
        seed: Some(seed),
        meas_return: (meas_level < 2).then_some(meas_return),
        data,
    })
}
