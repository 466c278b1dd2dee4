//! Statevector execution of QASM experiments.

use std::sync::atomic::{AtomicBool, Ordering};

use indexmap::IndexMap;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde_json::{Map, Value};

use super::gates::{apply, embed, GateSet, Matrix};
use crate::error::EngineError;
use crate::model::hex::{decode_hex, encode_hex};
use crate::model::instruction::{Bfunc, Copy, Instruction};
use crate::model::result::{ExpData, ExperimentResult, MemoryData, Shots};
use crate::model::{Experiment, UserConfig};
use crate::rng::{shot_rng, ShotRng};

pub const MAX_QUBITS: usize = 20;

/// Registers and memory of one shot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalState {
    pub memory: Vec<bool>,
    pub registers: Vec<bool>,
}

impl ClassicalState {
    pub fn new(memory_slots: usize, n_registers: usize) -> Self {
        ClassicalState {
            memory: vec![false; memory_slots],
            registers: vec![false; n_registers],
        }
    }

    /// `(registers AND mask) relation val`, evaluated bitwise at any width.
    pub fn bfunc_value(&self, b: &Bfunc) -> bool {
        let mask = decode_hex(&b.mask).unwrap_or_default();
        let val = decode_hex(&b.val).unwrap_or_default();
        let width = mask.len().max(val.len()).max(self.registers.len());
        let equal = (0..width).all(|i| {
            let r = self.registers.get(i).copied().unwrap_or(false);
            let m = mask.get(i).copied().unwrap_or(false);
            (r && m) == val.get(i).copied().unwrap_or(false)
        });
        if b.relation == "!=" {
            !equal
        } else {
            equal
        }
    }

    pub fn apply_bfunc(&mut self, b: &Bfunc) {
        let v = self.bfunc_value(b);
        if let Some(r) = b.register.single() {
            if let Some(slot) = self.registers.get_mut(r) {
                *slot = v;
            }
        }
        if let Some(m) = b.memory {
            if let Some(slot) = self.memory.get_mut(m) {
                *slot = v;
            }
        }
    }

    pub fn apply_copy(&mut self, c: &Copy) {
        let v = self.condition(c.register_orig);
        for &dst in &c.register_copy {
            if let Some(slot) = self.registers.get_mut(dst) {
                *slot = v;
            }
        }
    }

    pub fn condition(&self, reg: usize) -> bool {
        self.registers.get(reg).copied().unwrap_or(false)
    }
}

/// Probability that `qubit` reads 1.
pub fn prob_one(state: &[C64], qubit: usize) -> f64 {
    state
        .iter()
        .enumerate()
        .filter(|(i, _)| i >> qubit & 1 == 1)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Samples and collapses one qubit.
pub fn measure_qubit(state: &mut [C64], qubit: usize, rng: &mut ShotRng) -> bool {
    let p1 = prob_one(state, qubit);
    let outcome = rng.random::<f64>() < p1;
    let keep = if outcome { p1 } else { 1.0 - p1 };
    let scale = 1.0 / keep.sqrt();
    for (i, a) in state.iter_mut().enumerate() {
        if (i >> qubit & 1 == 1) == outcome {
            *a *= scale;
        } else {
            *a = C64::new(0.0, 0.0);
        }
    }
    outcome
}

pub fn flip(state: &mut [C64], qubit: usize) {
    let bit = 1usize << qubit;
    for i in 0..state.len() {
        if i & bit == 0 {
            state.swap(i, i | bit);
        }
    }
}

pub fn norm(state: &[C64]) -> f64 {
    state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn complex_list(state: &[C64]) -> Value {
    serde_json::to_value(state).expect("complex serializes")
}

/// Everything an experiment needs from its backend.
pub struct QasmContext<'a> {
    pub n_qubits: i64,
    pub n_registers: usize,
    pub conditional: bool,
    pub gates: &'a GateSet,
    pub cancel: Option<&'a AtomicBool>,
}

fn referenced_qubits(exp: &Experiment) -> usize {
    exp.instructions
        .iter()
        .filter_map(|i| match i {
            Instruction::Gate(g) => g.qubits.iter().max().copied(),
            Instruction::Barrier(q) | Instruction::Reset(q) => q.qubits.iter().max().copied(),
            Instruction::Measure(m) => m.qubits.iter().max().copied(),
            _ => None,
        })
        .max()
        .map_or(1, |m| m + 1)
}

pub fn qubit_count(exp: &Experiment, n_qubits: i64) -> Result<usize, EngineError> {
    let n = usize::try_from(n_qubits).unwrap_or_else(|_| referenced_qubits(exp));
    if n > MAX_QUBITS {
        return Err(EngineError::TooManyQubits {
            qubits: n,
            limit: MAX_QUBITS,
        });
    }
    Ok(n.max(1))
}

/// Instruction indices after which the bit-flip channel acts, with the
/// qubits it acts on.
fn noise_plan(exp: &Experiment, ec: &UserConfig, n: usize) -> Vec<(usize, Vec<usize>)> {
    let Some(bf) = &ec.bit_flip else {
        return Vec::new();
    };
    let exposed: Vec<usize> = bf.qubits.clone().unwrap_or_else(|| (0..n).collect());
    match &bf.after_instructions {
        Some(idx) => idx.iter().map(|&i| (i, exposed.clone())).collect(),
        None => exp
            .instructions
            .iter()
            .enumerate()
            .filter_map(|(i, ins)| match ins {
                Instruction::Gate(g) => {
                    let hit: Vec<usize> = g
                        .qubits
                        .iter()
                        .copied()
                        .filter(|q| exposed.contains(q))
                        .collect();
                    (!hit.is_empty()).then_some((i, hit))
                }
                _ => None,
            })
            .collect(),
    }
}

/// Counts keyed by hex memory, in numeric order of the memory value.
pub fn histogram<'a>(memories: impl Iterator<Item = &'a [bool]>) -> IndexMap<String, u64> {
    let mut by_bits: std::collections::BTreeMap<Vec<bool>, u64> = Default::default();
    for m in memories {
        // reversed so that lexicographic order is numeric order
        let key: Vec<bool> = m.iter().rev().copied().collect();
        *by_bits.entry(key).or_default() += 1;
    }
    by_bits
        .into_iter()
        .map(|(k, v)| {
            let bits: Vec<bool> = k.into_iter().rev().collect();
            (encode_hex(&bits), v)
        })
        .collect()
}

struct Shot {
    memory: Vec<bool>,
    state: Vec<C64>,
    snapshots: Map<String, Value>,
}

pub fn run_experiment(
    exp: &Experiment,
    ec: &UserConfig,
    ctx: &QasmContext,
    exp_index: usize,
    seed: u64,
) -> Result<ExperimentResult, EngineError> {
    let n = qubit_count(exp, ctx.n_qubits)?;
    let mut mats: Vec<Option<Matrix>> = Vec::with_capacity(exp.instructions.len());
    for (index, ins) in exp.instructions.iter().enumerate() {
        mats.push(match ins {
            Instruction::Gate(g) => {
                if g.conditional.is_some() && !ctx.conditional {
                    return Err(EngineError::ConditionalUnsupported { index });
                }
                if let Some(r) = g.conditional {
                    if r >= ctx.n_registers {
                        return Err(EngineError::RegisterOutOfRange { index, register: r });
                    }
                }
                Some(ctx.gates.matrix(&g.name, g.params(), g.qubits.len())?)
            }
            Instruction::Bfunc(_) | Instruction::Copy(_) if !ctx.conditional => {
                return Err(EngineError::ConditionalUnsupported { index })
            }
            _ => None,
        });
    }
    let noise = noise_plan(exp, ec, n);
    let p_flip = ec.bit_flip.as_ref().map_or(0.0, |b| b.probability);
    let shots = ec.shots();
    let mut memories = Vec::with_capacity(shots as usize);
    let mut first: Option<Shot> = None;
    for shot in 0..shots {
        if ctx.cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(EngineError::Cancelled);
        }
        let mut rng = shot_rng(seed, exp_index, shot);
        let s = run_shot(exp, &mats, &noise, p_flip, n, ec.memory_slots(), ctx, &mut rng, shot == 0);
        memories.push(s.memory.clone());
        if first.is_none() {
            first = Some(s);
        }
    }

    let mut data = ExpData {
        counts: Some(histogram(memories.iter().map(Vec::as_slice))),
        ..Default::default()
    };
    if ec.memory == Some(true) {
        data.memory = Some(MemoryData::Hex(memories.iter().map(|m| encode_hex(m)).collect()));
    }
    if let Some(f) = first {
        if ec.statevector == Some(true) {
            data.statevector = Some(f.state);
        }
        if !f.snapshots.is_empty() {
            let mut by_type = Map::new();
            by_type.insert("state".into(), Value::Object(f.snapshots));
            data.snapshots = Some(by_type);
        }
    }
    if ec.unitary == Some(true) {
        let u = run_unitary(exp, n, ctx.gates)?;
        data.unitary = Some(u.row_iter().map(|r| r.iter().copied().collect()).collect());
    }
    Ok(ExperimentResult {
        shots: Shots::Count(shots),
        status: Some("DONE".into()),
        success: true,
        header: exp.header.clone(),
        seed: Some(seed),
        meas_return: None,
        data,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_shot(
    exp: &Experiment,
    mats: &[Option<Matrix>],
    noise: &[(usize, Vec<usize>)],
    p_flip: f64,
    n: usize,
    memory_slots: usize,
    ctx: &QasmContext,
    rng: &mut ShotRng,
    record: bool,
) -> Shot {
    let mut state = vec![C64::new(0.0, 0.0); 1 << n];
    state[0] = C64::new(1.0, 0.0);
    let mut cl = ClassicalState::new(memory_slots, ctx.n_registers);
    let mut snapshots = Map::new();
    for (j, ins) in exp.instructions.iter().enumerate() {
        match ins {
            Instruction::Gate(g) => {
                if g.conditional.is_none_or(|r| cl.condition(r)) {
                    apply(&mut state, mats[j].as_ref().expect("gate matrix"), &g.qubits);
                }
            }
            Instruction::Measure(m) => {
                for (k, &q) in m.qubits.iter().enumerate() {
                    let bit = measure_qubit(&mut state, q, rng);
                    if let Some(slot) = m.memory.get(k).and_then(|&s| cl.memory.get_mut(s)) {
                        *slot = bit;
                    }
                    if let Some(slot) = m
                        .register
                        .as_ref()
                        .and_then(|r| r.get(k))
                        .and_then(|&s| cl.registers.get_mut(s))
                    {
                        *slot = bit;
                    }
                }
            }
            Instruction::Reset(r) => {
                for &q in &r.qubits {
                    if measure_qubit(&mut state, q, rng) {
                        flip(&mut state, q);
                    }
                }
            }
            Instruction::Bfunc(b) => cl.apply_bfunc(b),
            Instruction::Copy(c) => cl.apply_copy(c),
            Instruction::Snapshot(s) if record => {
                snapshots.insert(s.label.clone(), complex_list(&state));
            }
            _ => {}
        }
        for (_, qubits) in noise.iter().filter(|(at, _)| *at == j) {
            for &q in qubits {
                if rng.random::<f64>() < p_flip {
                    flip(&mut state, q);
                }
            }
        }
    }
    Shot {
        memory: cl.memory,
        state,
        snapshots,
    }
}

/// Product of all gate matrices, for measurement-free experiments.
pub fn run_unitary(exp: &Experiment, n: usize, gates: &GateSet) -> Result<Matrix, EngineError> {
    let mut u = Matrix::identity(1 << n, 1 << n);
    for (index, ins) in exp.instructions.iter().enumerate() {
        match ins {
            Instruction::Gate(g) if g.conditional.is_none() => {
                let m = gates.matrix(&g.name, g.params(), g.qubits.len())?;
                u = embed(&m, &g.qubits, n) * u;
            }
            Instruction::Barrier(_) | Instruction::Snapshot(_) => {}
            other => {
                return Err(EngineError::NonUnitaryInstruction {
                    index,
                    name: other.name().to_string(),
                })
            }
        }
    }
    Ok(u)
}
