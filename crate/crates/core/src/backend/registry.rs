use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde_json::Value;

use super::{Backend, BackendError};

/// Fixture documents compiled into the binary, by file name.
pub const BUILTIN_BACKENDS: &[(&str, &str)] = &[
    ("ibmqx2.json", include_str!("../../fixtures/backends/ibmqx2.json")),
    ("qasm_simulator.json", include_str!("../../fixtures/backends/qasm_simulator.json")),
    ("openpulse_2q.json", include_str!("../../fixtures/backends/openpulse_2q.json")),
    ("rabi.json", include_str!("../../fixtures/backends/rabi.json")),
    ("fixed_frequency_bus.json", include_str!("../../fixtures/backends/fixed_frequency_bus.json")),
    ("tunable_qubits.json", include_str!("../../fixtures/backends/tunable_qubits.json")),
    ("tunable_bus.json", include_str!("../../fixtures/backends/tunable_bus.json")),
    ("ion_trap.json", include_str!("../../fixtures/backends/ion_trap.json")),
    ("nmr.json", include_str!("../../fixtures/backends/nmr.json")),
];

/// Backends keyed by `backend_name`.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    backends: BTreeMap<String, Arc<Backend>>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    pub fn builtin() -> Registry {
        let mut r = Registry::new();
        for (file, src) in BUILTIN_BACKENDS {
            let v: Value = serde_json::from_str(src).expect("builtin fixture is JSON");
            let b = Backend::from_value(file, v).unwrap_or_else(|e| panic!("builtin fixture: {e}"));
            r.insert(b).expect("builtin names are unique");
        }
        r
    }

    /// Adds every `*.json` fixture in `dir`.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, BackendError> {
        let io = |e: std::io::Error| BackendError::Io {
            file: dir.display().to_string(),
            message: e.to_string(),
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for p in &paths {
            self.insert(Backend::from_file(p)?)?;
        }
        Ok(paths.len())
    }

    pub fn insert(&mut self, b: Backend) -> Result<Arc<Backend>, BackendError> {
        let name = b.name().to_string();
        if self.backends.contains_key(&name) {
            return Err(BackendError::Duplicate(name));
        }
        let b = Arc::new(b);
        self.backends.insert(name, b.clone());
        Ok(b)
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Backend>> {
        self.backends.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.backends.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Backend>> {
        self.backends.values()
    }

    pub fn len(&self) -> usize {
        self.backends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.backends.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load() {
        let r = Registry::builtin();
        assert_eq!(r.len(), BUILTIN_BACKENDS.len());
        assert!(r.get("ibmqx2").is_some());
        assert!(r.get("openpulse_2q").unwrap().configuration.open_pulse);
    }

    #[test]
    fn duplicates_rejected() {
        let mut r = Registry::builtin();
        let v: Value = serde_json::from_str(BUILTIN_BACKENDS[0].1).unwrap();
        let b = Backend::from_value("dup", v).unwrap();
        assert!(matches!(r.insert(b), Err(BackendError::Duplicate(_))));
    }

    #[test]
    fn load_dir_reads_json_only() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.json"), BUILTIN_BACKENDS[1].1).unwrap();
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let mut r = Registry::new();
        assert_eq!(r.load_dir(dir.path()).unwrap(), 1);
        assert_eq!(r.names().collect::<Vec<_>>(), ["qasm_simulator"]);
    }
}
