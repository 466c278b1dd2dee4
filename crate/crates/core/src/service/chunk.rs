//! Incremental result delivery.
//!
//! The cursor counts shots already served. A window labelled `[n1, n2]`
//! carries shots `n1..=n2` counted from 1, except that the first window
//! starts its label at 0.

use std::ops::Range;

use crate::model::{decode_hex, ComplexArray, ExpData, MeasReturn, MemoryData, ResultDocument, Shots};
use crate::qasm::engine::histogram;

/// Label and memory index range of the next window for one experiment.
///
/// Once `cursor >= shots` the window is empty and labelled `[shots + 1, shots]`.
pub fn window(cursor: u64, chunk: u64, shots: u64) -> ([u64; 2], Range<usize>) {
    if cursor >= shots {
        return ([shots + 1, shots], shots as usize..shots as usize);
    }
    let end = cursor.saturating_add(chunk.max(1)).min(shots);
    let start = if cursor == 0 { 0 } else { cursor + 1 };
    ([start, end], cursor as usize..end as usize)
}

fn shot_count(s: Shots) -> u64 {
    match s {
        Shots::Count(n) => n,
        Shots::Window([_, n]) => n,
    }
}

fn slice_data(data: &ExpData, r: Range<usize>, first: bool, single: bool) -> ExpData {
    let mut out = ExpData::default();
    match &data.memory {
        Some(MemoryData::Hex(m)) => {
            let part = &m[r.start.min(m.len())..r.end.min(m.len())];
            if data.counts.is_some() {
                let bits: Vec<Vec<bool>> = part.iter().filter_map(|h| decode_hex(h).ok()).collect();
                out.counts = Some(histogram(bits.iter().map(Vec::as_slice)));
            }
            out.memory = Some(MemoryData::Hex(part.to_vec()));
        }
        Some(MemoryData::Complex(a)) if single => {
            let a = match a {
                ComplexArray::D1(v) => ComplexArray::D1(v[r.start.min(v.len())..r.end.min(v.len())].to_vec()),
                ComplexArray::D2(v) => ComplexArray::D2(v[r.start.min(v.len())..r.end.min(v.len())].to_vec()),
                ComplexArray::D3(v) => ComplexArray::D3(v[r.start.min(v.len())..r.end.min(v.len())].to_vec()),
            };
            out.memory = Some(MemoryData::Complex(a));
        }
        // no per-shot axis: everything goes out with the first window
        _ if first => return data.clone(),
        _ => return out,
    }
    if first {
        out.statevector = data.statevector.clone();
        out.unitary = data.unitary.clone();
        out.snapshots = data.snapshots.clone();
    }
    out
}

/// The next chunk of `doc` and the advanced cursor.
///
/// Experiments without per-shot memory deliver their whole data in the
/// window that starts at 0.
pub fn next_chunk(doc: &ResultDocument, cursor: u64, chunk: u64) -> (ResultDocument, u64) {
    let mut out = doc.clone();
    let mut max_shots = 0;
    for r in &mut out.results {
        let shots = shot_count(r.shots);
        max_shots = max_shots.max(shots);
        let per_shot = matches!(r.data.memory, Some(MemoryData::Hex(_)))
            || r.meas_return == Some(MeasReturn::Single);
        let (label, range) = match (per_shot, cursor) {
            (true, _) => window(cursor, chunk, shots),
            (false, 0) => ([0, shots], 0..shots as usize),
            (false, _) => window(shots, chunk, shots),
        };
        r.data = slice_data(&r.data, range, cursor == 0, per_shot);
        r.shots = Shots::Window(label);
    }
    let next = cursor.saturating_add(chunk.max(1)).min(max_shots).max(cursor);
    (out, next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_of_400_over_1000() {
        let mut c = 0;
        let mut labels = vec![];
        for _ in 0..4 {
            let (l, r) = window(c, 400, 1000);
            labels.push(l);
            c += r.len() as u64;
        }
        assert_eq!(labels, [[0, 400], [401, 800], [801, 1000], [1001, 1000]]);
    }

    #[test]
    fn zero_chunk_still_advances() {
        assert_eq!(window(0, 0, 5).1, 0..1);
    }
}
