//! SUM expansion and evaluation of term trees to matrices.

use std::collections::HashMap;

use indexmap::IndexMap;
use num_complex::Complex64 as C64;

use super::layout::{local_operator, Matrix, SubsystemKind, SubsystemLayout};
use super::parser::{Bound, Index, Node, OpKind};
use super::DslError;

/// Hermiticity tolerance for the evaluated parts.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// `H(t) = static_part + Σ_ch amp_ch(t) · drives[ch]` with real lab-frame
/// channel amplitudes. Matrices are in rad/ns when vars are in GHz and the
/// terms carry their own `2*pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedHamiltonian {
    pub layout: SubsystemLayout,
    pub static_part: Matrix,
    pub drives: IndexMap<String, Matrix>,
    /// Channels that appear inside a nonlinear function.
    pub nonlinear: Vec<String>,
}

impl EvaluatedHamiltonian {
    pub fn dim(&self) -> usize {
        self.static_part.nrows()
    }

    /// Full Hamiltonian for the given channel amplitudes.
    pub fn at(&self, amps: &[(&str, f64)]) -> Matrix {
        let mut h = self.static_part.clone();
        for (ch, v) in amps {
            if let Some(m) = self.drives.get(*ch) {
                h += m * C64::new(*v, 0.0);
            }
        }
        h
    }
}

/// Largest entry of `m - m†`.
pub fn hermitian_residual(m: &Matrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0f64, |a, x| a.max(x.norm()))
}

type Env = HashMap<String, i64>;

fn resolve_bound(b: &Bound, env: &Env, n_qubits: Option<usize>) -> Result<i64, DslError> {
    match b {
        Bound::Lit(v) => Ok(*v),
        Bound::Sym { var, offset } => {
            let base = match env.get(var) {
                Some(v) => *v,
                None if var == "N" => match n_qubits {
                    Some(n) => n as i64 - 1,
                    None => return Err(DslError::UnboundBound(var.clone())),
                },
                None => return Err(DslError::UnboundBound(var.clone())),
            };
            Ok(base + offset)
        }
    }
}

fn resolve_index(i: &Index, env: &Env) -> Result<usize, DslError> {
    match i {
        Index::Lit(v) => Ok(*v),
        Index::Sym { var, offset } => {
            let v = env.get(var).ok_or_else(|| DslError::UnboundIndex(var.clone()))? + offset;
            usize::try_from(v).map_err(|_| DslError::DimensionMismatch(format!("index {var}{offset:+} evaluates to {v}")))
        }
    }
}

fn expand(node: &Node, env: &mut Env, n_qubits: Option<usize>) -> Result<Node, DslError> {
    Ok(match node {
        Node::Const { .. } => node.clone(),
        Node::Var { name, index } => match index {
            None => node.clone(),
            Some(i) => Node::Var {
                name: format!("{name}{}", resolve_index(i, env)?),
                index: None,
            },
        },
        Node::ChannelRef { kind, index } => Node::ChannelRef {
            kind: *kind,
            index: Index::Lit(resolve_index(index, env)?),
        },
        Node::Operator { op, index } => Node::Operator {
            op: *op,
            index: index.as_ref().map(|i| resolve_index(i, env).map(Index::Lit)).transpose()?,
        },
        Node::Product { factors } => Node::Product {
            factors: factors.iter().map(|f| expand(f, env, n_qubits)).collect::<Result<_, _>>()?,
        },
        Node::Sum { terms } => Node::Sum {
            terms: terms.iter().map(|f| expand(f, env, n_qubits)).collect::<Result<_, _>>()?,
        },
        Node::Nonlinear { func, arg } => Node::Nonlinear {
            func: *func,
            arg: Box::new(expand(arg, env, n_qubits)?),
        },
        Node::SumMacro { var, lo, hi, body } => {
            let lo = resolve_bound(lo, env, n_qubits)?;
            let hi = resolve_bound(hi, env, n_qubits)?;
            let saved = env.get(var).copied();
            let mut terms = Vec::new();
            for k in lo..=hi {
                env.insert(var.clone(), k);
                terms.push(expand(body, env, n_qubits)?);
            }
            match saved {
                Some(v) => env.insert(var.clone(), v),
                None => env.remove(var),
            };
            Node::Sum { terms }
        }
    })
}

/// Unrolls every SUM and resolves indices. `n_qubits` binds `N`.
pub fn expand_sums(terms: &[Node], n_qubits: Option<usize>) -> Result<Vec<Node>, DslError> {
    terms.iter().map(|t| expand(t, &mut Env::new(), n_qubits)).collect()
}

/// Builds the layout an expanded term list needs: `n_qubits` qubits of
/// `qubit_levels` levels, then any higher-indexed subsystem as an oscillator
/// whose dimension comes from `osc` (keyed by index) or `osc_levels`.
pub fn infer_layout(
    expanded: &[Node],
    n_qubits: usize,
    qubit_levels: usize,
    osc_levels: usize,
    osc: &IndexMap<String, f64>,
) -> Result<SubsystemLayout, DslError> {
    fn scan(n: &Node, max: &mut Option<usize>, unindexed: &mut bool) {
        match n {
            Node::Operator { index: Some(Index::Lit(i)), .. } => *max = Some(max.map_or(*i, |m| m.max(*i))),
            Node::Operator { index: None, .. } => *unindexed = true,
            Node::Product { factors: v } | Node::Sum { terms: v } => v.iter().for_each(|x| scan(x, max, unindexed)),
            Node::Nonlinear { arg, .. } => scan(arg, max, unindexed),
            _ => {}
        }
    }
    let (mut max, mut unindexed) = (None, false);
    expanded.iter().for_each(|n| scan(n, &mut max, &mut unindexed));

    let osc_dim = |k: usize| -> Result<usize, DslError> {
        match osc.get(&k.to_string()) {
            Some(d) if d.fract() == 0.0 && *d >= 2.0 => Ok(*d as usize),
            Some(d) => Err(DslError::DimensionMismatch(format!("oscillator {k} has dimension {d}"))),
            None => Ok(osc_levels),
        }
    };
    let mut layout = SubsystemLayout::default();
    for _ in 0..n_qubits {
        if qubit_levels <= 2 {
            layout.push(SubsystemKind::Qubit, 2)?;
        } else {
            layout.push(SubsystemKind::Oscillator, qubit_levels)?;
        }
    }
    let top = max.map_or(0, |m| m + 1);
    for k in n_qubits..top {
        layout.push(SubsystemKind::Oscillator, osc_dim(k)?)?;
    }
    // An operator without an index refers to the one subsystem past the qubits.
    if unindexed && layout.len() == n_qubits {
        layout.push(SubsystemKind::Oscillator, osc_dim(n_qubits)?)?;
    }
    Ok(layout)
}

#[derive(Debug, Clone)]
struct Mono {
    coef: f64,
    ops: Vec<(usize, OpKind)>,
    channel: Option<String>,
    opaque: Vec<String>,
}

impl Mono {
    fn scalar(coef: f64) -> Mono {
        Mono {
            coef,
            ops: Vec::new(),
            channel: None,
            opaque: Vec::new(),
        }
    }

    fn is_scalar(&self) -> bool {
        self.ops.is_empty() && self.channel.is_none() && self.opaque.is_empty()
    }

    fn times(&self, o: &Mono) -> Result<Mono, DslError> {
        let channel = match (&self.channel, &o.channel) {
            (Some(a), Some(b)) => return Err(DslError::Unsupported(format!("product of channel amplitudes {a} and {b}"))),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        Ok(Mono {
            coef: self.coef * o.coef,
            ops: self.ops.iter().chain(&o.ops).copied().collect(),
            channel,
            opaque: self.opaque.iter().chain(&o.opaque).cloned().collect(),
        })
    }
}

struct Ctx<'a> {
    vars: &'a IndexMap<String, f64>,
    layout: &'a SubsystemLayout,
    n_qubits: usize,
}

fn eval(node: &Node, cx: &Ctx) -> Result<Vec<Mono>, DslError> {
    Ok(match node {
        Node::Const { value } => vec![Mono::scalar(*value)],
        Node::Var { name, index: None } => {
            let v = cx.vars.get(name).ok_or_else(|| DslError::UnboundVariable(name.clone()))?;
            vec![Mono::scalar(*v)]
        }
        Node::Operator { op, index } => {
            let k = match index {
                Some(Index::Lit(k)) => *k,
                None if cx.layout.len() == cx.n_qubits + 1 => cx.n_qubits,
                None => return Err(DslError::UnresolvedOperator(format!("{op:?}"))),
                Some(Index::Sym { var, .. }) => return Err(DslError::UnboundIndex(var.clone())),
            };
            if k >= cx.layout.len() {
                return Err(DslError::DimensionMismatch(format!(
                    "operator {op:?}{{{k}}} but the layout has {} subsystems",
                    cx.layout.len()
                )));
            }
            vec![Mono {
                ops: vec![(k, *op)],
                ..Mono::scalar(1.0)
            }]
        }
        Node::ChannelRef { kind, index } => {
            let Index::Lit(i) = index else {
                return Err(DslError::UnboundIndex(format!("{index:?}")));
            };
            if *kind != 'U' && *i >= cx.n_qubits {
                return Err(DslError::UnknownChannel(format!("{kind}{i}")));
            }
            vec![Mono {
                channel: Some(format!("{}{i}", kind.to_ascii_lowercase())),
                ..Mono::scalar(1.0)
            }]
        }
        Node::Product { factors } => {
            let mut acc = vec![Mono::scalar(1.0)];
            for f in factors {
                let rhs = eval(f, cx)?;
                let mut next = Vec::with_capacity(acc.len() * rhs.len());
                for a in &acc {
                    for b in &rhs {
                        next.push(a.times(b)?);
                    }
                }
                acc = next;
            }
            acc
        }
        Node::Sum { terms } => {
            let mut out = Vec::new();
            for t in terms {
                out.extend(eval(t, cx)?);
            }
            out
        }
        Node::Nonlinear { func, arg } => {
            let inner = eval(arg, cx)?;
            if inner.iter().all(Mono::is_scalar) {
                vec![Mono::scalar(func.apply(inner.iter().map(|m| m.coef).sum()))]
            } else if inner.iter().any(|m| !m.ops.is_empty()) {
                return Err(DslError::Unsupported(format!("operator inside {func:?}")));
            } else {
                let mut opaque: Vec<String> = inner
                    .iter()
                    .flat_map(|m| m.channel.iter().chain(&m.opaque).cloned())
                    .collect();
                opaque.dedup();
                vec![Mono {
                    opaque,
                    ..Mono::scalar(1.0)
                }]
            }
        }
        Node::Var { .. } | Node::SumMacro { .. } => {
            return Err(DslError::Unsupported("term must be expanded before evaluation".into()))
        }
    })
}

fn mono_matrix(m: &Mono, layout: &SubsystemLayout) -> Matrix {
    let mut local: Vec<Option<Matrix>> = vec![None; layout.len()];
    for (k, op) in &m.ops {
        let f = local_operator(*op, layout.subsystems[*k].dim);
        local[*k] = Some(match local[*k].take() {
            Some(acc) => acc * f,
            None => f,
        });
    }
    layout.kron(&local) * C64::new(m.coef, 0.0)
}

/// Evaluates terms on `layout`. SUM macros are expanded first with `N`
/// bound to `n_qubits - 1`.
pub fn bind_and_evaluate(
    terms: &[Node],
    vars: &IndexMap<String, f64>,
    layout: &SubsystemLayout,
    n_qubits: usize,
) -> Result<EvaluatedHamiltonian, DslError> {
    if layout.len() < n_qubits {
        return Err(DslError::DimensionMismatch(format!(
            "{n_qubits} qubits but the layout has {} subsystems",
            layout.len()
        )));
    }
    let expanded = expand_sums(terms, Some(n_qubits))?;
    let cx = Ctx {
        vars,
        layout,
        n_qubits,
    };
    let d = layout.total_dim();
    let mut static_part = Matrix::zeros(d, d);
    let mut drives: IndexMap<String, Matrix> = IndexMap::new();
    let mut nonlinear: Vec<String> = Vec::new();
    for t in &expanded {
        for m in eval(t, &cx)? {
            if !m.opaque.is_empty() {
                for c in m.opaque.iter().chain(&m.channel) {
                    if !nonlinear.contains(c) {
                        nonlinear.push(c.clone());
                    }
                }
                continue;
            }
            let mat = mono_matrix(&m, layout);
            match &m.channel {
                Some(ch) => {
                    *drives.entry(ch.clone()).or_insert_with(|| Matrix::zeros(d, d)) += mat;
                }
                None => static_part += mat,
            }
        }
    }
    let r = hermitian_residual(&static_part);
    if r > HERMITIAN_TOL {
        return Err(DslError::NonHermitian {
            part: "static".into(),
            residual: r,
        });
    }
    for (ch, m) in &drives {
        let r = hermitian_residual(m);
        if r > HERMITIAN_TOL {
            return Err(DslError::NonHermitian {
                part: ch.clone(),
                residual: r,
            });
        }
    }
    Ok(EvaluatedHamiltonian {
        layout: layout.clone(),
        static_part,
        drives,
        nonlinear,
    })
}
