//! Subsystem layouts and single-subsystem operator matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::parser::OpKind;
use super::DslError;
use crate::model::UChannelTerm;

pub type Matrix = DMatrix<C64>;

/// Default truncation for oscillator subsystems.
pub const DEFAULT_OSC_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsystemKind {
    Qubit,
    Oscillator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub kind: SubsystemKind,
    pub dim: usize,
}

/// Ordered subsystems. Subsystem 0 is the least significant factor of the
/// tensor product, so basis index = Σ level_k · Π_{j<k} dim_j.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SubsystemLayout {
    pub subsystems: Vec<Subsystem>,
}

impl SubsystemLayout {
    pub fn qubits(n: usize) -> SubsystemLayout {
        SubsystemLayout {
            subsystems: vec![
                Subsystem {
                    kind: SubsystemKind::Qubit,
                    dim: 2
                };
                n
            ],
        }
    }

    pub fn push(&mut self, kind: SubsystemKind, dim: usize) -> Result<(), DslError> {
        if dim < 2 {
            return Err(DslError::DimensionMismatch(format!("subsystem {} has dimension {dim}", self.subsystems.len())));
        }
        self.subsystems.push(Subsystem { kind, dim });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn stride(&self, k: usize) -> usize {
        self.subsystems[..k].iter().map(|s| s.dim).product()
    }

    /// Level of subsystem `k` in basis state `index`.
    pub fn level(&self, index: usize, k: usize) -> usize {
        (index / self.stride(k)) % self.subsystems[k].dim
    }

    /// Tensor product of per-subsystem factors; `None` entries are identity.
    pub fn kron(&self, local: &[Option<Matrix>]) -> Matrix {
        let mut out = Matrix::from_element(1, 1, C64::new(1.0, 0.0));
        for (k, s) in self.subsystems.iter().enumerate() {
            let f = match local.get(k).and_then(|m| m.as_ref()) {
                Some(m) => m.clone(),
                None => Matrix::identity(s.dim, s.dim),
            };
            out = f.kronecker(&out);
        }
        out
    }

    /// Embeds one local operator on subsystem `k`.
    pub fn embed(&self, k: usize, m: &Matrix) -> Matrix {
        let mut local = vec![None; self.len()];
        local[k] = Some(m.clone());
        self.kron(&local)
    }
}

fn lowering(dim: usize) -> Matrix {
    let mut a = Matrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Matrix of `op` on a subsystem of dimension `dim`. On two levels these are
/// the Pauli operators with |1⟩ the excited state.
pub fn local_operator(op: OpKind, dim: usize) -> Matrix {
    let a = lowering(dim);
    let ad = a.adjoint();
    let id = Matrix::identity(dim, dim);
    let i = C64::new(0.0, 1.0);
    match op {
        OpKind::X => &a + &ad,
        OpKind::Y => (&ad - &a) * i,
        OpKind::Z => &id - (&ad * &a) * C64::new(2.0, 0.0),
        OpKind::Sp | OpKind::Raise => ad,
        OpKind::Sm | OpKind::Lower => a,
        OpKind::O | OpKind::N => &ad * &a,
        OpKind::I => id,
    }
}

/// `n_qubits` transmons modelled as Duffing oscillators of `levels` each.
pub fn duffing_layout(n_qubits: usize, levels: usize) -> SubsystemLayout {
    let levels = levels.max(2);
    SubsystemLayout {
        subsystems: vec![
            Subsystem {
                kind: SubsystemKind::Oscillator,
                dim: levels
            };
            n_qubits
        ],
    }
}

/// `(δ/2)(1 − a†a)a†a` on one subsystem of dimension `levels`.
pub fn duffing_local(delta: f64, levels: usize) -> Matrix {
    let n = local_operator(OpKind::N, levels);
    let id = Matrix::identity(levels, levels);
    (&id - &n) * &n * C64::new(delta / 2.0, 0.0)
}

/// Sum of Duffing terms over every subsystem of `layout`.
pub fn duffing_term(layout: &SubsystemLayout, anharmonicities: &[f64]) -> Matrix {
    let d = layout.total_dim();
    let mut out = Matrix::zeros(d, d);
    for (k, (s, delta)) in layout.subsystems.iter().zip(anharmonicities).enumerate() {
        out += layout.embed(k, &duffing_local(*delta, s.dim));
    }
    out
}

/// LO frequency of a control channel: Σ scale_j · qubit_lo_freq[q_j].
pub fn u_channel_frequency(spec: &[UChannelTerm], qubit_lo_freq: &[f64]) -> Result<f64, DslError> {
    let mut f = 0.0;
    for (j, t) in spec.iter().enumerate() {
        if t.scale.im != 0.0 {
            return Err(DslError::ComplexScaleUnsupported { term: j });
        }
        let lo = qubit_lo_freq
            .get(t.q)
            .ok_or_else(|| DslError::DimensionMismatch(format!("u channel term {j} names qubit {} without an LO frequency", t.q)))?;
        f += t.scale.re * lo;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn two_level_algebra_exact() {
        let op = |k| local_operator(k, 2);
        assert_eq!(op(OpKind::X), op(OpKind::Sp) + op(OpKind::Sm));
        assert_eq!(op(OpKind::Lower), op(OpKind::Sm));
        assert_eq!(op(OpKind::Raise), op(OpKind::Sp));
        assert_eq!(op(OpKind::O), (op(OpKind::I) - op(OpKind::Z)) * c(0.5));
        let y = Matrix::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)]);
        assert_eq!(op(OpKind::Y), y);
        assert_eq!(op(OpKind::Z), Matrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]));
    }

    #[test]
    fn duffing_vanishes_on_two_levels() {
        assert_eq!(duffing_local(-0.3, 2), Matrix::zeros(2, 2));
    }

    #[test]
    fn duffing_three_levels() {
        let m = duffing_local(-0.3, 3);
        for n in 0..3 {
            let nf = n as f64;
            assert!((m[(n, n)].re - (-0.3 / 2.0) * (1.0 - nf) * nf).abs() < 1e-15);
        }
        assert_eq!(duffing_layout(2, 3).total_dim(), 9);
    }

    #[test]
    fn kron_order_puts_subsystem_zero_last() {
        let l = SubsystemLayout::qubits(2);
        let x0 = l.embed(0, &local_operator(OpKind::X, 2));
        // X on qubit 0 flips the lowest bit.
        assert_eq!(x0[(1, 0)], c(1.0));
        assert_eq!(x0[(2, 0)], c(0.0));
        assert_eq!(l.level(2, 1), 1);
    }

    #[test]
    fn u_channel_lo() {
        let lo = [5.0, 5.1];
        let one = |q, s: f64| UChannelTerm { q, scale: C64::new(s, 0.0) };
        assert_eq!(u_channel_frequency(&[one(0, 1.0)], &lo).unwrap(), 5.0);
        assert!((u_channel_frequency(&[one(0, -1.0), one(1, 1.0)], &lo).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(u_channel_frequency(&[], &lo).unwrap(), 0.0);
        let bad = UChannelTerm { q: 0, scale: C64::new(0.0, 1.0) };
        assert!(matches!(u_channel_frequency(&[bad], &lo), Err(DslError::ComplexScaleUnsupported { term: 0 })));
    }
}
