use std::fmt::Write as _;

use serde::Serialize;

use super::Backend;
use crate::hamiltonian::{expand_sums, u_channel_frequency, HamiltonianSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelInfo {
    pub name: String,
    /// How the LO is set: a qubit or measurement LO, or a u-channel formula.
    pub lo: String,
    /// Default LO frequency in GHz, when the defaults give one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo_freq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo_range: Option<[f64; 2]>,
}

/// Summary of a backend for operators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Description {
    pub backend_name: String,
    pub backend_version: String,
    pub n_qubits: i64,
    pub open_pulse: bool,
    pub basis_gates: Vec<String>,
    pub n_uchannels: usize,
    pub meas_levels: Vec<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dtm: Option<f64>,
    pub channels: Vec<ChannelInfo>,
    pub hamiltonian_terms: Vec<String>,
    /// Number of terms after `_SUM` expansion, or the parse error.
    pub expanded_terms: Result<usize, String>,
    pub hamiltonian_vars: Vec<(String, f64)>,
    pub meas_kernels: Vec<String>,
    pub discriminators: Vec<String>,
}

fn formula(terms: &[crate::model::UChannelTerm]) -> String {
    let mut s = String::new();
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            s.push_str(" + ");
        }
        if t.scale.im == 0.0 {
            let _ = write!(s, "{}*q{}", t.scale.re, t.q);
        } else {
            let _ = write!(s, "({}{:+}j)*q{}", t.scale.re, t.scale.im, t.q);
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

impl Description {
    pub fn of(b: &Backend) -> Description {
        let cfg = &b.configuration;
        let p = &cfg.pulse;
        let qubit_freqs = b.defaults.as_ref().map(|d| d.qubit_freq_est.clone());
        let meas_freqs = b.defaults.as_ref().map(|d| d.meas_freq_est.clone());
        let nq = cfg.n_qubits.max(0) as usize;

        let mut channels = Vec::new();
        if cfg.open_pulse {
            for q in 0..nq {
                channels.push(ChannelInfo {
                    name: format!("d{q}"),
                    lo: format!("qubit {q} LO"),
                    lo_freq: qubit_freqs.as_ref().and_then(|f| f.get(q).copied()),
                    lo_range: p.qubit_lo_range.as_ref().and_then(|r| r.get(q).copied()),
                });
            }
            for q in 0..nq {
                channels.push(ChannelInfo {
                    name: format!("m{q}"),
                    lo: format!("measurement {q} LO"),
                    lo_freq: meas_freqs.as_ref().and_then(|f| f.get(q).copied()),
                    lo_range: p.meas_lo_range.as_ref().and_then(|r| r.get(q).copied()),
                });
            }
            let u_lo = p.u_channel_lo.as_deref().unwrap_or(&[]);
            for u in 0..cfg.n_uchannels() {
                let terms = u_lo.get(u).map(Vec::as_slice).unwrap_or(&[]);
                channels.push(ChannelInfo {
                    name: format!("u{u}"),
                    lo: formula(terms),
                    lo_freq: qubit_freqs
                        .as_ref()
                        .and_then(|f| u_channel_frequency(terms, f).ok()),
                    lo_range: None,
                });
            }
        }

        let ham = p.hamiltonian.as_ref();
        let hamiltonian_terms = ham.map(|h| h.terms().to_vec()).unwrap_or_default();
        let expanded_terms = match ham {
            None => Ok(0),
            Some(h) => HamiltonianSpec::from_dict(h)
                .and_then(|s| expand_sums(&s.terms, Some(nq)))
                .map(|t| t.len())
                .map_err(|e| e.to_string()),
        };
        let hamiltonian_vars = ham
            .and_then(|h| h.vars.as_ref())
            .map(|v| v.iter().map(|(k, x)| (k.clone(), *x)).collect())
            .unwrap_or_default();

        Description {
            backend_name: cfg.backend_name.clone(),
            backend_version: cfg.backend_version.clone(),
            n_qubits: cfg.n_qubits,
            open_pulse: cfg.open_pulse,
            basis_gates: cfg.basis_gates.clone(),
            n_uchannels: cfg.n_uchannels(),
            meas_levels: cfg.meas_levels().to_vec(),
            dt: p.dt,
            dtm: p.dtm,
            channels,
            hamiltonian_terms,
            expanded_terms,
            hamiltonian_vars,
            meas_kernels: p.meas_kernels.clone().unwrap_or_default(),
            discriminators: p.discriminators.clone().unwrap_or_default(),
        }
    }

    /// Plain-text table.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "backend       {} {}", self.backend_name, self.backend_version);
        let _ = writeln!(s, "n_qubits      {}", self.n_qubits);
        let _ = writeln!(s, "open_pulse    {}", self.open_pulse);
        let _ = writeln!(s, "basis_gates   {}", self.basis_gates.join(", "));
        let _ = writeln!(s, "n_uchannels   {}", self.n_uchannels);
        let levels: Vec<String> = self.meas_levels.iter().map(u8::to_string).collect();
        let _ = writeln!(s, "meas_levels   [{}]", levels.join(", "));
        if let (Some(dt), Some(dtm)) = (self.dt, self.dtm) {
            let _ = writeln!(s, "dt / dtm      {dt} ns / {dtm} ns");
        }
        if !self.channels.is_empty() {
            let _ = writeln!(s, "\nchannel  lo                       freq (GHz)  range");
            for c in &self.channels {
                let f = c.lo_freq.map_or("-".to_string(), |f| format!("{f:.6}"));
                let r = c.lo_range.map_or("-".to_string(), |r| format!("[{}, {}]", r[0], r[1]));
                let _ = writeln!(s, "{:<8} {:<24} {:<11} {}", c.name, c.lo, f, r);
            }
        }
        if !self.hamiltonian_terms.is_empty() {
            let n = match &self.expanded_terms {
                Ok(n) => n.to_string(),
                Err(e) => format!("error: {e}"),
            };
            let _ = writeln!(s, "\nhamiltonian terms ({n} after expansion)");
            for t in &self.hamiltonian_terms {
                let _ = writeln!(s, "  {t}");
            }
            for (k, v) in &self.hamiltonian_vars {
                let _ = writeln!(s, "  {k} = {v}");
            }
        }
        if !self.meas_kernels.is_empty() || !self.discriminators.is_empty() {
            let _ = writeln!(s, "\nkernels        {}", self.meas_kernels.join(", "));
            let _ = writeln!(s, "discriminators {}", self.discriminators.join(", "));
        }
        s
    }
}
