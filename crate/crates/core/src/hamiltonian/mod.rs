//! The `h_str` Hamiltonian term language.

pub mod eval;
pub mod layout;
pub mod lexer;
pub mod parser;

use indexmap::IndexMap;
use serde_json::Value;
use thiserror::Error;

pub use eval::{bind_and_evaluate, expand_sums, hermitian_residual, infer_layout, EvaluatedHamiltonian};
pub use layout::{DEFAULT_OSC_LEVELS, duffing_layout, duffing_local, duffing_term, local_operator, u_channel_frequency, Matrix, SubsystemKind, SubsystemLayout};
pub use parser::{parse_hstr, parse_term, Node, OpKind};

use crate::model::HamiltonianDict;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("term {term}, column {column}: {message}{}", expected_suffix(.expected))]
    Syntax {
        term: usize,
        column: usize,
        message: String,
        expected: Vec<String>,
    },
    #[error("unbound bound {0}")]
    UnboundBound(String),
    #[error("index variable {0} is not bound by an enclosing SUM")]
    UnboundIndex(String),
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("operator {0} has no index and there is no single extra subsystem")]
    UnresolvedOperator(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown channel {0}")]
    UnknownChannel(String),
    #[error("{part} part is not Hermitian (residual {residual:e})")]
    NonHermitian { part: String, residual: f64 },
    #[error("unsupported term: {0}")]
    Unsupported(String),
    #[error("u channel term {term} has a complex scale")]
    ComplexScaleUnsupported { term: usize },
}

fn expected_suffix(e: &[String]) -> String {
    if e.is_empty() {
        String::new()
    } else {
        format!("; expected one of {}", e.join(", "))
    }
}

impl DslError {
    pub fn syntax(term: usize, column: usize, message: impl Into<String>, expected: &[&str]) -> DslError {
        DslError::Syntax {
            term,
            column,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn column(&self) -> Option<usize> {
        match self {
            DslError::Syntax { column, .. } => Some(*column),
            _ => None,
        }
    }
}

/// Parsed terms with their variable bindings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HamiltonianSpec {
    pub terms: Vec<Node>,
    pub vars: IndexMap<String, f64>,
    /// Oscillator dimensions keyed by subsystem index.
    pub osc: IndexMap<String, f64>,
}

impl HamiltonianSpec {
    pub fn from_dict(d: &HamiltonianDict) -> Result<HamiltonianSpec, DslError> {
        Ok(HamiltonianSpec {
            terms: parse_hstr(d.h_str.as_deref().unwrap_or_default())?,
            vars: d.vars.clone().unwrap_or_default(),
            osc: d.osc.clone().unwrap_or_default(),
        })
    }

    pub fn layout(&self, n_qubits: usize, qubit_levels: usize, osc_levels: usize) -> Result<SubsystemLayout, DslError> {
        infer_layout(&expand_sums(&self.terms, Some(n_qubits))?, n_qubits, qubit_levels, osc_levels, &self.osc)
    }

    pub fn evaluate(&self, layout: &SubsystemLayout, n_qubits: usize) -> Result<EvaluatedHamiltonian, DslError> {
        bind_and_evaluate(&self.terms, &self.vars, layout, n_qubits)
    }

    /// Expression tree as JSON, for debugging.
    pub fn dump(&self) -> Value {
        serde_json::to_value(&self.terms).expect("term trees serialize")
    }
}
