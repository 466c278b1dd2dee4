//! Emulator for the Qobj job format: OpenQASM and OpenPulse experiments,
//! backend configuration documents, and a job service.

pub mod backend;
pub mod cli;
pub mod document;
pub mod error;
pub mod hamiltonian;
pub mod lowering;
pub mod model;
pub mod qasm;
pub mod pulse;
pub mod rng;
pub mod service;

pub use error::EngineError;
