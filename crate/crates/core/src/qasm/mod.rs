//! OpenQASM experiment execution over a statevector.

pub mod engine;
pub mod gates;
pub mod qasm_def;

pub use engine::{run_experiment, run_unitary, ClassicalState, QasmContext, MAX_QUBITS};
pub use gates::{GateError, GateSet};
pub use qasm_def::{parse_qasm_def, DefError, GateDef};
