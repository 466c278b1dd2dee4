//! Interaction-picture propagation with a rotating-wave cutoff.
//!
//! The frame is `H_f = diag(H_static)` with energies `E_k`. A channel with
//! carrier `ω` contributes `Re[s e^{iωt}] M` in the lab frame, which splits
//! into `(s/2) M_jk e^{i(E_j-E_k+ω)t}` and `(s*/2) M_jk e^{i(E_j-E_k-ω)t}`.
//! Terms whose rotation rate exceeds the cutoff are dropped; off-diagonal
//! static couplings are treated the same way.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::EngineError;
use crate::hamiltonian::EvaluatedHamiltonian;
use crate::model::Channel;

pub type State = DVector<C64>;

/// Largest phase (rad) any kept term may advance within one substep.
pub const MAX_PHASE_PER_SUBSTEP: f64 = 0.1;

const ZERO_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Branch {
    j: usize,
    k: usize,
    coef: C64,
    freq: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct DriveTerms {
    channel: Channel,
    /// Multiplied by `s/2`.
    pos: Vec<Branch>,
    /// Multiplied by `conj(s)/2`.
    neg: Vec<Branch>,
    max_freq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    dim: usize,
    dt: f64,
    kappa: f64,
    energies: Vec<f64>,
    statics: Vec<Branch>,
    static_max_freq: f64,
    drives: Vec<DriveTerms>,
}

impl Propagator {
    /// `carriers` gives the angular carrier frequency (rad/ns) of every
    /// channel that couples to the Hamiltonian. `cutoff` is in rad/ns.
    pub fn new(
        h: &EvaluatedHamiltonian,
        carriers: &[(Channel, f64)],
        kappa: f64,
        dt: f64,
        cutoff: f64,
    ) -> Result<Propagator, EngineError> {
        let dim = h.dim();
        let energies: Vec<f64> = (0..dim).map(|k| h.static_part[(k, k)].re).collect();
        let mut statics = Vec::new();
        for j in 0..dim {
            for k in 0..dim {
                let c = h.static_part[(j, k)];
                let freq = energies[j] - energies[k];
                if j != k && c.norm() > ZERO_TOL && freq.abs() <= cutoff {
                    statics.push(Branch { j, k, coef: c, freq });
                }
            }
        }
        let static_max_freq = statics.iter().fold(0.0f64, |m, b| m.max(b.freq.abs()));
        let mut drives = Vec::new();
        for (name, m) in &h.drives {
            let channel = Channel::parse(name).ok_or_else(|| EngineError::Invalid(format!("bad channel {name} in Hamiltonian")))?;
            let omega = carriers.iter().find(|(c, _)| *c == channel).map_or(0.0, |(_, w)| *w);
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            for j in 0..dim {
                for k in 0..dim {
                    let c = m[(j, k)];
                    if c.norm() <= ZERO_TOL {
                        continue;
                    }
                    let delta = energies[j] - energies[k];
                    if (delta + omega).abs() <= cutoff {
                        pos.push(Branch { j, k, coef: c, freq: delta + omega });
                    }
                    if (delta - omega).abs() <= cutoff {
                        neg.push(Branch { j, k, coef: c, freq: delta - omega });
                    }
                }
            }
            let max_freq = pos.iter().chain(&neg).fold(0.0f64, |a, b| a.max(b.freq.abs()));
            drives.push(DriveTerms {
                channel,
                pos,
                neg,
                max_freq,
            });
        }
        Ok(Propagator {
            dim,
            dt,
            kappa,
            energies,
            statics,
            static_max_freq,
            drives,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Channels whose amplitudes `step` expects, in order.
    pub fn channels(&self) -> Vec<Channel> {
        self.drives.iter().map(|d| d.channel).collect()
    }

    pub fn ground(&self) -> State {
        let mut s = State::zeros(self.dim);
        s[0] = C64::new(1.0, 0.0);
        s
    }

    /// Frame energies (rad/ns).
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Substeps needed for sample `amps`.
    pub fn substeps(&self, amps: &[C64]) -> usize {
        let f = self
            .drives
            .iter()
            .zip(amps)
            .filter(|(_, a)| a.norm() > 0.0)
            .fold(self.static_max_freq, |m, (d, _)| m.max(d.max_freq));
        ((f * self.dt / MAX_PHASE_PER_SUBSTEP).ceil() as usize).max(1)
    }

    /// Interaction-picture Hamiltonian at time `t` (ns).
    pub fn hamiltonian(&self, t: f64, amps: &[C64]) -> DMatrix<C64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for b in &self.statics {
            h[(b.j, b.k)] += b.coef * C64::from_polar(1.0, b.freq * t);
        }
        for (d, s) in self.drives.iter().zip(amps) {
            if s.norm() == 0.0 {
                continue;
            }
            let half = s * (0.5 * self.kappa);
            for b in &d.pos {
                h[(b.j, b.k)] += b.coef * half * C64::from_polar(1.0, b.freq * t);
            }
            for b in &d.neg {
                h[(b.j, b.k)] += b.coef * half.conj() * C64::from_polar(1.0, b.freq * t);
            }
        }
        h
    }

    /// Advances `psi` across sample `t_index` with channel samples `amps`
    /// (ordered as [`Propagator::channels`]).
    pub fn step(&self, psi: &mut State, t_index: u64, amps: &[C64]) {
        self.step_with(psi, t_index, amps, self.substeps(amps));
    }

    pub fn step_with(&self, psi: &mut State, t_index: u64, amps: &[C64], n_sub: usize) {
        if self.statics.is_empty() && amps.iter().all(|a| a.norm() == 0.0) {
            return;
        }
        let h_step = self.dt / n_sub as f64;
        let t0 = t_index as f64 * self.dt;
        for m in 0..n_sub {
            let t = t0 + (m as f64 + 0.5) * h_step;
            let u = expm_hermitian(self.hamiltonian(t, amps), h_step);
            *psi = u * &*psi;
        }
    }
}

/// `exp(-i H h)` for Hermitian `H`.
pub fn expm_hermitian(h: DMatrix<C64>, step: f64) -> DMatrix<C64> {
    let n = h.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, C64::from_polar(1.0, -h[(0, 0)].re * step));
    }
    let herm = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l * step)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{parse_hstr, EvaluatedHamiltonian, SubsystemLayout};
    use indexmap::IndexMap;

    fn rabi_h(nu: f64) -> EvaluatedHamiltonian {
        let t = parse_hstr(&["X{0}||D{0}", "2*pi*v0*O{0}"]).unwrap();
        let vars: IndexMap<String, f64> = [("v0".to_string(), nu)].into_iter().collect();
        crate::hamiltonian::bind_and_evaluate(&t, &vars, &SubsystemLayout::qubits(1), 1).unwrap()
    }

    fn d0() -> Channel {
        Channel::parse("d0").unwrap()
    }

    #[test]
    fn free_evolution_is_trivial_in_frame() {
        let p = Propagator::new(&rabi_h(5.0), &[(d0(), 2.0 * std::f64::consts::PI * 5.0)], 1.0, 0.8, 15.0).unwrap();
        let mut psi = p.ground();
        psi[0] = C64::new(0.6, 0.0);
        psi[1] = C64::new(0.0, 0.8);
        let before = psi.clone();
        for t in 0..100 {
            p.step(&mut psi, t, &[C64::default()]);
        }
        assert!((before.dotc(&psi).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resonant_square_pulse_rotates_by_area() {
        let p = Propagator::new(&rabi_h(5.0), &[(d0(), 2.0 * std::f64::consts::PI * 5.0)], 1.0, 0.5, 15.0).unwrap();
        let mut psi = p.ground();
        // Ten samples with total area π.
        let amp = std::f64::consts::PI / (10.0 * 0.5);
        for t in 0..10 {
            p.step(&mut psi, t, &[C64::new(amp, 0.0)]);
        }
        assert!((psi[1].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_frame_drives_about_y() {
        let p = Propagator::new(&rabi_h(5.0), &[(d0(), 2.0 * std::f64::consts::PI * 5.0)], 1.0, 0.5, 15.0).unwrap();
        let mut psi = p.ground();
        // area π/2 with the sample phase an fc of π/2 leaves behind
        let amp = std::f64::consts::FRAC_PI_2 / (10.0 * 0.5);
        let s = C64::from_polar(amp, -std::f64::consts::FRAC_PI_2);
        for t in 0..10 {
            p.step(&mut psi, t, &[s]);
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((psi[0] - C64::new(h, 0.0)).norm() < 1e-12, "{psi}");
        assert!((psi[1] - C64::new(h, 0.0)).norm() < 1e-12, "{psi}");
    }

    #[test]
    fn counter_rotating_branch_dropped() {
        let p = Propagator::new(&rabi_h(5.0), &[(d0(), 2.0 * std::f64::consts::PI * 5.0)], 1.0, 0.5, 15.0).unwrap();
        assert_eq!(p.drives[0].pos.len(), 1);
        assert_eq!(p.drives[0].neg.len(), 1);
        assert_eq!(p.substeps(&[C64::new(1.0, 0.0)]), 1);
    }

    #[test]
    fn expm_is_unitary() {
        let h = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.3, -0.2), C64::new(0.3, 0.2), C64::new(-0.5, 0.0)]);
        let u = expm_hermitian(h, 0.7);
        assert!((u.adjoint() * &u - DMatrix::identity(2, 2)).norm() < 1e-12);
    }
}
