//! Fuzzed interleavings of service operations checked against the job
//! transition relation.

use std::collections::HashMap;

use qobj_emu::model::JobState::{self, *};
use qobj_emu::service::{Service, ServiceConfig, Ticket};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::criteria::registry;

fn legal(from: JobState, to: JobState) -> bool {
    matches!(
        (from, to),
        (Queued, Initializing) | (Queued, Cancelled) | (Initializing, Running) | (Initializing, Error)
            | (Running, Done) | (Running, Error) | (Running, Cancelled)
    )
}

fn terminal(s: JobState) -> bool {
    matches!(s, Done | Error | Cancelled)
}

pub struct Summary {
    pub traces: usize,
    pub transitions: usize,
}

struct Trace<'a> {
    svc: &'a Service,
    seen: HashMap<String, JobState>,
    cancelled_queued: Vec<String>,
    tickets: Vec<Ticket>,
    transitions: usize,
}

impl Trace<'_> {
    fn observe(&mut self, op: &str) -> Result<(), String> {
        for (id, last) in self.seen.iter_mut() {
            let now = self.svc.status(id).map_err(|e| e.to_string())?.status;
            if now != *last {
                if !legal(*last, now) {
                    return Err(format!("{op}: job {id} moved {last:?} -> {now:?}"));
                }
                if (*last, now) == (Queued, Cancelled) {
                    self.cancelled_queued.push(id.clone());
                }
                self.transitions += 1;
                *last = now;
            }
            let has_result = self.svc.result(id).is_ok();
            if has_result != (now == Done) {
                return Err(format!("{op}: job {id} in {now:?} with result present = {has_result}"));
            }
        }
        Ok(())
    }

    fn ids_in(&self, s: JobState) -> Vec<String> {
        let mut v: Vec<String> = self.seen.iter().filter(|(_, st)| **st == s).map(|(id, _)| id.clone()).collect();
        v.sort();
        v
    }
}

fn tiny_job(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut ins = vec![json!({"name": "u3", "qubits": [0], "params": [rng.random_range(0.0..3.0), 0.0, 0.0]})];
    ins.push(json!({"name": "measure", "qubits": [0], "memory": [0]}));
    serde_json::to_vec(&json!({
        "qobj_id": "lifecycle", "schema_version": "1.0", "type": "QASM",
        "config": {"shots": 4, "memory_slots": 1},
        "experiments": [{"instructions": ins}]
    }))
    .unwrap()
}

/// Runs `n` traces. Each trace is a random interleaving of submit, cancel,
/// pick, begin and execute over a handful of jobs on two backends, followed
/// by a drain.
pub fn run_traces(n: usize, seed: u64) -> Result<Summary, String> {
    let svc = Service::new(registry().clone(), &ServiceConfig::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transitions = 0;
    for trace_no in 0..n {
        let mut t = Trace { svc: &svc, seen: HashMap::new(), cancelled_queued: vec![], tickets: vec![], transitions: 0 };
        let steps = rng.random_range(2..=10);
        for _ in 0..steps {
            let op = rng.random_range(0..5);
            let name = match op {
                0 => {
                    let backend = if rng.random_bool(0.5) { "qasm_simulator" } else { "ibmqx2" };
                    let s = svc.submit(backend, &tiny_job(&mut rng)).map_err(|e| e.to_string())?;
                    if s.status != Queued {
                        return Err(format!("submit returned {:?}", s.status));
                    }
                    t.seen.insert(s.job_id, Queued);
                    "submit"
                }
                1 => {
                    let ids: Vec<String> = t.seen.keys().cloned().collect();
                    if !ids.is_empty() {
                        let id = &ids[rng.random_range(0..ids.len())];
                        svc.cancel(id).map_err(|e| e.to_string())?;
                    }
                    "cancel"
                }
                2 => {
                    svc.pick();
                    "pick"
                }
                3 => {
                    let ready = t.ids_in(Initializing);
                    if !ready.is_empty() {
                        let id = &ready[rng.random_range(0..ready.len())];
                        if let Some(tk) = svc.begin(id) {
                            t.tickets.push(tk);
                        }
                    }
                    "begin"
                }
                _ => {
                    if !t.tickets.is_empty() {
                        let tk = t.tickets.swap_remove(rng.random_range(0..t.tickets.len()));
                        let out = tk.execute();
                        svc.finish(tk, out);
                    }
                    "execute"
                }
            };
            t.observe(name).map_err(|e| format!("trace {trace_no}: {e}"))?;
        }
        // drain
        loop {
            if let Some(tk) = t.tickets.pop() {
                let out = tk.execute();
                svc.finish(tk, out);
            } else if let Some(id) = t.ids_in(Initializing).first() {
                if let Some(tk) = svc.begin(id) {
                    t.tickets.push(tk);
                }
            } else if svc.pick().is_none() {
                break;
            }
            t.observe("drain").map_err(|e| format!("trace {trace_no}: {e}"))?;
        }
        for (id, st) in &t.seen {
            if !terminal(*st) {
                return Err(format!("trace {trace_no}: job {id} left in {st:?}"));
            }
        }
        for id in &t.cancelled_queued {
            let m = svc.meta(id).map_err(|e| e.to_string())?;
            if m.started.is_some() {
                return Err(format!("trace {trace_no}: job {id} cancelled while queued but started"));
            }
        }
        transitions += t.transitions;
    }
    Ok(Summary { traces: n, transitions })
}
