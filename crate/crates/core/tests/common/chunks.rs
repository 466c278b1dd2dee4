//! Chunked delivery must partition the shots of a result exactly.

use qobj_emu::model::{MemoryData, ResultDocument, Shots};
use qobj_emu::service::chunk::next_chunk;
use serde_json::json;

/// A result with `shots` hex memory entries, shot i storing i mod 8.
pub fn synthetic(shots: u64) -> ResultDocument {
    let memory: Vec<String> = (0..shots).map(|i| format!("0x{:x}", i % 8)).collect();
    serde_json::from_value(json!({
        "backend_name": "synthetic", "backend_version": "0.0.0", "qobj_id": "q", "job_id": "j",
        "success": true,
        "results": [{"shots": shots, "success": true, "data": {"memory": memory}}]
    }))
    .unwrap()
}

/// Walks every window of a `shots`-shot result in steps of `chunk`.
pub fn check_partition(shots: u64, chunk: u64) -> Result<(), String> {
    let doc = synthetic(shots);
    let original = match &doc.results[0].data.memory {
        Some(MemoryData::Hex(m)) => m.clone(),
        _ => unreachable!(),
    };
    let mut cursor = 0;
    let mut gathered = vec![];
    let mut labels = vec![];
    loop {
        let (part, next) = next_chunk(&doc, cursor, chunk);
        let label = match part.results[0].shots {
            Shots::Window(w) => w,
            Shots::Count(n) => return Err(format!("chunk at {cursor} labelled with a plain count {n}")),
        };
        let mem = match &part.results[0].data.memory {
            Some(MemoryData::Hex(m)) => m.clone(),
            other => return Err(format!("chunk at {cursor}: memory {other:?}")),
        };
        if label[0] > label[1] {
            if !mem.is_empty() {
                return Err(format!("empty window {label:?} carries {} shots", mem.len()));
            }
            break;
        }
        labels.push(label);
        gathered.extend(mem);
        if next == cursor {
            return Err(format!("cursor stuck at {cursor}"));
        }
        cursor = next;
    }
    let ctx = || format!("shots {shots}, chunk {chunk}");
    if labels.first().map(|l| l[0]) != Some(0) || labels.last().map(|l| l[1]) != Some(shots) {
        return Err(format!("{}: labels {labels:?} do not span [0, shots]", ctx()));
    }
    for w in labels.windows(2) {
        if w[1][0] != w[0][1] + 1 {
            return Err(format!("{}: gap or overlap between {:?} and {:?}", ctx(), w[0], w[1]));
        }
    }
    if labels.len() as u64 != shots.div_ceil(chunk) {
        return Err(format!("{}: {} windows", ctx(), labels.len()));
    }
    if gathered != original {
        return Err(format!("{}: concatenated memory differs", ctx()));
    }
    Ok(())
}
