//! Acquisition signal synthesis, kernels, discriminators and result shapes.
//!
//! The acquired signal is the measurement stimulus with a phase of `π/2`
//! when the qubit reads 1, plus Gaussian IQ noise.

use indexmap::IndexMap;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::EngineError;
use crate::model::hex::encode_hex;
use crate::model::instruction::KernelSpec;
use crate::model::result::{ComplexArray, ExpData, MemoryData};
use crate::model::MeasReturn;
use crate::qasm::engine::histogram;

/// Probability that subsystem `k` is outside its ground level.
pub fn prob_excited(psi: &[C64], dims: &[usize], k: usize) -> f64 {
    let stride: usize = dims[..k].iter().product();
    psi.iter()
        .enumerate()
        .filter(|(i, _)| !(i / stride).is_multiple_of(dims[k]))
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Projectively samples whether subsystem `k` is excited, collapsing `psi`.
pub fn measure_subsystem<R: Rng>(psi: &mut [C64], dims: &[usize], k: usize, rng: &mut R) -> bool {
    let p = prob_excited(psi, dims, k);
    let bit = rng.random::<f64>() < p;
    let keep = if bit { p } else { 1.0 - p };
    let scale = if keep > 0.0 { 1.0 / keep.sqrt() } else { 0.0 };
    let stride: usize = dims[..k].iter().product();
    for (i, a) in psi.iter_mut().enumerate() {
        if !(i / stride).is_multiple_of(dims[k]) == bit {
            *a *= scale;
        } else {
            *a = C64::default();
        }
    }
    bit
}

/// Level-0 record: `len` samples spaced by `dtm`, taken from the stimulus
/// (spaced by `dt`) at the nearest sample.
pub fn level0_signal<R: Rng>(stimulus: &[C64], dt: f64, dtm: f64, len: usize, bit: bool, sigma: f64, rng: &mut R) -> Vec<C64> {
    let rot = if bit { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
    let noise = Normal::new(0.0, sigma.max(0.0)).expect("finite sigma");
    (0..len)
        .map(|j| {
            let s = if stimulus.is_empty() {
                C64::default()
            } else {
                let idx = ((j as f64 * dtm / dt).round() as usize).min(stimulus.len() - 1);
                stimulus[idx]
            };
            let n = if sigma > 0.0 {
                C64::new(noise.sample(rng), noise.sample(rng))
            } else {
                C64::default()
            };
            s * rot + n
        })
        .collect()
}

pub fn boxcar(samples: &[C64]) -> C64 {
    if samples.is_empty() {
        return C64::default();
    }
    samples.iter().sum::<C64>() / samples.len() as f64
}

pub fn apply_kernel(spec: &KernelSpec, samples: &[C64]) -> Result<C64, EngineError> {
    match spec.name.as_str() {
        "boxcar" | "default" => Ok(boxcar(samples)),
        other => Err(EngineError::KernelUnknown(other.to_string())),
    }
}

/// 1 iff the point lies strictly above the line `Q = a·I + b`.
pub fn discriminate_max_1q_fidelity(iq: C64, params: [f64; 2]) -> bool {
    iq.im > params[0] * iq.re + params[1]
}

fn line_params(params: &[f64], i: usize) -> [f64; 2] {
    match params.len() {
        0 | 1 => [1.0, 0.0],
        n if n >= 2 * (i + 1) => [params[2 * i], params[2 * i + 1]],
        _ => [params[0], params[1]],
    }
}

/// Applies one discriminator to the IQ points of all qubits of an acquire.
pub fn discriminate(spec: &KernelSpec, iqs: &[C64]) -> Result<Vec<bool>, EngineError> {
    match spec.name.as_str() {
        "max_1Q_fidelity" | "max_2Q_fidelity" => Ok(iqs
            .iter()
            .enumerate()
            .map(|(i, iq)| discriminate_max_1q_fidelity(*iq, line_params(spec.params(), i)))
            .collect()),
        other => Err(EngineError::DiscriminatorUnknown(other.to_string())),
    }
}

/// Per-shot measurement output, zero-filled for slots nobody wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotRecord {
    pub level0: Vec<Vec<C64>>,
    pub level1: Vec<C64>,
    pub bits: Vec<bool>,
}

impl ShotRecord {
    pub fn zeros(slots: usize, slot_size: usize) -> ShotRecord {
        ShotRecord {
            level0: vec![vec![C64::default(); slot_size]; slots],
            level1: vec![C64::default(); slots],
            bits: vec![false; slots],
        }
    }
}

fn mean_rows(rows: impl Iterator<Item = Vec<C64>>, n: usize, width: usize) -> Vec<C64> {
    let mut acc = vec![C64::default(); width];
    for r in rows {
        for (a, x) in acc.iter_mut().zip(r) {
            *a += x;
        }
    }
    if n > 0 {
        acc.iter_mut().for_each(|a| *a /= n as f64);
    }
    acc
}

/// Shapes per level: 0/avg r×l, 0/single s×r×l, 1/avg r, 1/single s×r,
/// 2 counts plus per-shot hex memory.
pub fn assemble_pulse_result(
    records: &[ShotRecord],
    meas_level: u8,
    meas_return: MeasReturn,
    memory_slots: usize,
    memory_slot_size: usize,
) -> Result<ExpData, EngineError> {
    for (s, r) in records.iter().enumerate() {
        if r.level1.len() != memory_slots
            || r.bits.len() != memory_slots
            || r.level0.len() != memory_slots
            || r.level0.iter().any(|x| x.len() != memory_slot_size)
        {
            return Err(EngineError::ShapeMismatch(format!("shot {s} does not have {memory_slots} slots of {memory_slot_size}")));
        }
    }
    let n = records.len();
    let mut data = ExpData::default();
    match (meas_level, meas_return) {
        (0, MeasReturn::Avg) => {
            let rows = (0..memory_slots)
                .map(|slot| mean_rows(records.iter().map(|r| r.level0[slot].clone()), n, memory_slot_size))
                .collect();
            data.memory = Some(MemoryData::Complex(ComplexArray::D2(rows)));
        }
        (0, MeasReturn::Single) => {
            let v = records.iter().map(|r| r.level0.clone()).collect();
            data.memory = Some(MemoryData::Complex(ComplexArray::D3(v)));
        }
        (1, MeasReturn::Avg) => {
            let v = mean_rows(records.iter().map(|r| r.level1.clone()), n, memory_slots);
            data.memory = Some(MemoryData::Complex(ComplexArray::D1(v)));
        }
        (1, MeasReturn::Single) => {
            let v = records.iter().map(|r| r.level1.clone()).collect();
            data.memory = Some(MemoryData::Complex(ComplexArray::D2(v)));
        }
        (2, _) => {
            let counts: IndexMap<String, u64> = histogram(records.iter().map(|r| r.bits.as_slice()));
            data.counts = Some(counts);
            data.memory = Some(MemoryData::Hex(records.iter().map(|r| encode_hex(&r.bits)).collect()));
        }
        (l, _) => return Err(EngineError::Invalid(format!("meas_level {l} is not supported"))),
    }
    Ok(data)
}
