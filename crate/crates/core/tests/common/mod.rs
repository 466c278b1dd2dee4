#![allow(dead_code)]

pub mod chunks;
pub mod criteria;
pub mod e2e;
pub mod lifecycle;
pub mod oracle;

use std::path::PathBuf;

use qobj_emu::backend::Registry;
use qobj_emu::document::{check_document, CheckOptions, Checked, DocKind};
use qobj_emu::model::{json_eq, Mode};
use serde::Deserialize;
use serde_json::Value;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[derive(Debug, Deserialize)]
pub struct ListingEntry {
    pub file: String,
    pub kind: DocKind,
    pub title: String,
    #[serde(default)]
    pub backend: Option<String>,
    #[serde(default)]
    pub wrap_config: Option<Value>,
}

pub fn manifest() -> Vec<ListingEntry> {
    let p = fixtures().join("listings/manifest.json");
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

pub fn listing(file: &str) -> Value {
    let p = fixtures().join("listings").join(file);
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

pub struct ListingOutcome {
    pub entry: ListingEntry,
    pub checked: Result<Checked, String>,
    pub round_trips: bool,
}

impl ListingOutcome {
    pub fn passed(&self) -> bool {
        matches!(&self.checked, Ok(c) if !c.report.has_errors()) && self.round_trips
    }

    pub fn describe(&self) -> String {
        match &self.checked {
            Err(e) => format!("{}: parse failed: {e}", self.entry.file),
            Ok(c) => {
                let errs: Vec<String> = c.report.errors().map(|v| v.to_string()).collect();
                format!("{}: round_trip={} errors={:?}", self.entry.file, self.round_trips, errs)
            }
        }
    }
}

/// Parses (strictly), validates and re-serializes every listing.
pub fn check_listings() -> Vec<ListingOutcome> {
    let reg = Registry::builtin();
    manifest()
        .into_iter()
        .map(|entry| {
            let original = listing(&entry.file);
            let backend = entry.backend.as_deref().map(|n| reg.get(n).unwrap().as_ref());
            let opts = CheckOptions {
                backend,
                wrap_config: entry.wrap_config.as_ref(),
                mode: Mode::Strict,
                strict: false,
            };
            let checked = check_document(entry.kind, original.clone(), &opts).map_err(|e| e.to_string());
            let round_trips = matches!(&checked, Ok(c) if json_eq(&c.roundtrip, &original));
            ListingOutcome {
                entry,
                checked,
                round_trips,
            }
        })
        .collect()
}
