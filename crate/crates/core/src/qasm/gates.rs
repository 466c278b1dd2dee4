//! Gate matrices.
//!
//! `U(θ,φ,λ)` follows the OpenQASM 2.0 definition
//! `[[cos(θ/2), -e^{iλ} sin(θ/2)], [e^{iφ} sin(θ/2), e^{i(φ+λ)} cos(θ/2)]]`.
//! For multi-qubit matrices, bit `i` of the local basis index is the state
//! of the gate's `i`-th qubit argument.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use super::qasm_def::{parse_qasm_def, DefError, GateDef, Stmt};
use crate::model::BackendConfiguration;

pub type Matrix = DMatrix<C64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GateError {
    #[error("unknown gate {0:?}")]
    UnknownGate(String),
    #[error("gate {name:?} expects {expected} qubit(s), got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("gate {name:?} expects {expected} parameter(s), got {got}")]
    ParamMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("bad definition of {name:?}: {source}")]
    Definition { name: String, source: DefError },
}

pub fn u_matrix(theta: f64, phi: f64, lambda: f64) -> Matrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    Matrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c, 0.0),
            -C64::from_polar(s, lambda),
            C64::from_polar(s, phi),
            C64::from_polar(c, phi + lambda),
        ],
    )
}

/// CNOT with argument 0 as control.
pub fn cx_matrix() -> Matrix {
    let mut m = Matrix::zeros(4, 4);
    let one = C64::new(1.0, 0.0);
    m[(0, 0)] = one;
    m[(2, 2)] = one;
    m[(3, 1)] = one;
    m[(1, 3)] = one;
    m
}

/// `(qubits, params)` for the primitives available without a definition.
fn builtin_shape(name: &str) -> Option<(usize, usize)> {
    match name {
        "U" | "u3" => Some((1, 3)),
        "u2" => Some((1, 2)),
        "u1" => Some((1, 1)),
        "id" => Some((1, 0)),
        "CX" | "cx" => Some((2, 0)),
        _ => None,
    }
}

fn builtin(name: &str, p: &[f64]) -> Option<Matrix> {
    use std::f64::consts::FRAC_PI_2;
    Some(match name {
        "U" | "u3" => u_matrix(p[0], p[1], p[2]),
        "u2" => u_matrix(FRAC_PI_2, p[0], p[1]),
        "u1" => u_matrix(0.0, 0.0, p[0]),
        "id" => Matrix::identity(2, 2),
        "CX" | "cx" => cx_matrix(),
        _ => return None,
    })
}

/// Lifts `m`, acting on local qubits `targets`, to an `n`-qubit operator.
pub fn embed(m: &Matrix, targets: &[usize], n: usize) -> Matrix {
    let dim = 1usize << n;
    let k = targets.len();
    let mut out = Matrix::zeros(dim, dim);
    for col in 0..dim {
        let local_in = local_index(col, targets);
        let base = col & !targets.iter().fold(0, |acc, &t| acc | (1 << t));
        for local_out in 0..(1usize << k) {
            let v = m[(local_out, local_in)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            out[(scatter(base, local_out, targets), col)] = v;
        }
    }
    out
}

fn local_index(global: usize, targets: &[usize]) -> usize {
    targets
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &t)| acc | (((global >> t) & 1) << i))
}

fn scatter(base: usize, local: usize, targets: &[usize]) -> usize {
    targets
        .iter()
        .enumerate()
        .fold(base, |acc, (i, &t)| acc | (((local >> i) & 1) << t))
}

/// Applies `m` to the listed qubits of a statevector in place.
pub fn apply(state: &mut [C64], m: &Matrix, targets: &[usize]) {
    let k = targets.len();
    let sub = 1usize << k;
    let mask = targets.iter().fold(0usize, |acc, &t| acc | (1 << t));
    let offsets: Vec<usize> = (0..sub).map(|l| scatter(0, l, targets)).collect();
    let mut buf = vec![C64::new(0.0, 0.0); sub];
    for base in 0..state.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            buf[l] = state[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (c, b) in buf.iter().enumerate() {
                acc += m[(r, c)] * b;
            }
            state[base | off] = acc;
        }
    }
}

/// Builtins plus definitions taken from a backend's gate list.
#[derive(Debug, Clone, Default)]
pub struct GateSet {
    defs: HashMap<String, GateDef>,
}

impl GateSet {
    pub fn builtin() -> GateSet {
        GateSet::default()
    }

    pub fn from_config(cfg: &BackendConfiguration) -> Result<GateSet, GateError> {
        let mut defs = HashMap::new();
        for g in &cfg.gates {
            if builtin_shape(&g.name).is_some() {
                continue;
            }
            let d = parse_qasm_def(&g.qasm_def).map_err(|source| GateError::Definition {
                name: g.name.clone(),
                source,
            })?;
            defs.insert(g.name.clone(), d);
        }
        Ok(GateSet { defs })
    }

    pub fn insert(&mut self, def: GateDef) {
        self.defs.insert(def.name.clone(), def);
    }

    pub fn shape(&self, name: &str) -> Option<(usize, usize)> {
        builtin_shape(name).or_else(|| self.defs.get(name).map(|d| (d.args.len(), d.params.len())))
    }

    /// Matrix of `name` applied to `nqubits` arguments with `params`.
    pub fn matrix(&self, name: &str, params: &[f64], nqubits: usize) -> Result<Matrix, GateError> {
        let (q, p) = self
            .shape(name)
            .ok_or_else(|| GateError::UnknownGate(name.to_string()))?;
        if q != nqubits {
            return Err(GateError::ArityMismatch {
                name: name.into(),
                expected: q,
                got: nqubits,
            });
        }
        if p != params.len() {
            return Err(GateError::ParamMismatch {
                name: name.into(),
                expected: p,
                got: params.len(),
            });
        }
        if let Some(m) = builtin(name, params) {
            return Ok(m);
        }
        let def = &self.defs[name];
        let n = def.args.len();
        let mut acc = Matrix::identity(1 << n, 1 << n);
        for stmt in &def.body {
            let step = match stmt {
                Stmt::U(e, q) => {
                    let u = u_matrix(e[0].eval(params), e[1].eval(params), e[2].eval(params));
                    embed(&u, &[*q], n)
                }
                Stmt::CX(c, t) => embed(&cx_matrix(), &[*c, *t], n),
            };
            acc = step * acc;
        }
        Ok(acc)
    }
}

/// Largest `|a - e^{iα} b|` entry after removing the best global phase.
pub fn phase_distance(a: &Matrix, b: &Matrix) -> f64 {
    let mut best = (0usize, 0usize);
    let mut mag = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if b[(i, j)].norm() > mag {
                mag = b[(i, j)].norm();
                best = (i, j);
            }
        }
    }
    let phase = if mag > 0.0 && a[best].norm() > 0.0 {
        let r = a[best] / b[best];
        r / r.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    (a - b.map(|x| x * phase))
        .iter()
        .fold(0.0f64, |m, x| m.max(x.norm()))
}
