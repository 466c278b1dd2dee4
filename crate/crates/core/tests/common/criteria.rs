//! One function per acceptance criterion. Each returns `Ok(detail)` or
//! `Err(detail)`; the acceptance harness prints them and the integration
//! tests assert on them.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use qobj_emu::backend::{Backend, Registry, RunOptions};
use qobj_emu::model::{self, ComplexArray, MemoryData, Mode, ResultDocument};
use qobj_emu::model::validate::Options;
use qobj_emu::qasm::{parse_qasm_def, ClassicalState, GateSet};
use qobj_emu::model::instruction::{Bfunc, RegisterRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::oracle::{self, Mat};
use super::{check_listings, listing};

pub type Outcome = Result<String, String>;
pub type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("{what} took {t:?}, limit {limit:?}"))?;
    Ok(t)
}

pub fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(Registry::builtin)
}

pub fn backend(name: &str) -> Arc<Backend> {
    registry().get(name).unwrap_or_else(|| panic!("no builtin {name}")).clone()
}

/// Validates against `b` and runs with a fixed seed.
pub fn run_value(b: &Backend, v: &Value, seed: u64) -> Result<ResultDocument, String> {
    let q = model::parse_qobj_value(v.clone(), Mode::Lenient).map_err(|e| e.to_string())?;
    let r = b.validate(&q, v, Options::default());
    if r.has_errors() {
        let errs: Vec<String> = r.errors().map(|v| v.to_string()).collect();
        return Err(format!("rejected by {}: {}", b.name(), errs.join("; ")));
    }
    let opts = RunOptions { job_id: "acceptance".into(), seed: Some(seed), ..Default::default() };
    b.run(&q.value, &opts).map_err(|e| e.to_string())
}

/// Counts keyed by integer value, parsed here rather than by the crate.
pub fn counts(doc: &ResultDocument, exp: usize) -> BTreeMap<u64, u64> {
    let c = doc.results[exp].data.counts.as_ref().expect("counts present");
    c.iter()
        .map(|(k, v)| (u64::from_str_radix(k.trim_start_matches("0x").trim_start_matches("0X"), 16).unwrap(), *v))
        .collect()
}

fn snapshot(doc: &ResultDocument, exp: usize, label: &str) -> Result<Vec<C64>, String> {
    let s = doc.results[exp]
        .data
        .snapshots
        .as_ref()
        .and_then(|s| s.get("state"))
        .and_then(|s| s.get(label))
        .ok_or_else(|| format!("experiment {exp}: no state snapshot {label:?}"))?;
    serde_json::from_value(s.clone()).map_err(|e| e.to_string())
}

// 1

pub fn c1_wire_fidelity() -> Outcome {
    let out = check_listings();
    let failed: Vec<String> = out.iter().filter(|o| !o.passed()).map(|o| o.describe()).collect();
    if failed.is_empty() {
        Ok(format!("{} listings parse strictly, validate and round-trip", out.len()))
    } else {
        Err(failed.join("; "))
    }
}

// 2

pub fn c2_bell() -> Outcome {
    let start = Instant::now();
    let doc = run_value(&backend("ibmqx2"), &listing("25_bell_qobj.json"), 2018)?;
    let sigma = (1000.0f64 * 0.25).sqrt();
    let mut detail = vec![];
    for (exp, (a, b)) in [(0, (0u64, 3u64)), (1, (1, 2))] {
        let c = counts(&doc, exp);
        let total: u64 = c.values().sum();
        ensure(total == 1000, || format!("experiment {exp}: {total} shots"))?;
        let (na, nb) = (c.get(&a).copied().unwrap_or(0), c.get(&b).copied().unwrap_or(0));
        let mass = (na + nb) as f64 / total as f64;
        ensure(mass >= 0.99, || format!("experiment {exp}: mass {mass} on {{{a:#x},{b:#x}}}"))?;
        for n in [na, nb] {
            ensure((n as f64 - 500.0).abs() <= 5.0 * sigma, || format!("experiment {exp}: {n} outside 500 ± 5σ"))?;
        }
        detail.push(format!("exp{exp} {a:#x}:{na} {b:#x}:{nb}"));
    }
    let t = within(Duration::from_secs(1), start, "Bell")?;
    Ok(format!("{} in {t:.0?}", detail.join(", ")))
}

// 3

fn teleport_with_state(theta: f64, phi: f64, lambda: f64) -> Value {
    let mut v = listing("31_teleport_qobj.json");
    let ins = v["experiments"][0]["instructions"].as_array_mut().unwrap();
    ins[0] = json!({"name": "u3", "qubits": [0], "params": [theta, phi, lambda]});
    ins.push(json!({"name": "snapshot", "label": "teleported", "type": "state"}));
    v["config"]["shots"] = json!(1);
    v
}

pub fn c3_teleport() -> Outcome {
    let b = backend("ibmqx2");
    let doc = run_value(&b, &listing("31_teleport_qobj.json"), 7)?;
    let c = counts(&doc, 0);
    ensure(c.keys().all(|k| *k < 4), || format!("keys outside 0x0..0x3: {c:?}"))?;
    let chi2: f64 = (0..4u64).map(|k| {
        let o = c.get(&k).copied().unwrap_or(0) as f64;
        (o - 250.0).powi(2) / 250.0
    }).sum();
    let p = oracle::chi2_sf_3(chi2);
    ensure(p > 0.001, || format!("chi2 {chi2:.3}, p {p:.2e}"))?;

    // snapshot variant: Q2 must carry Q0's initial state in every branch
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 1.0f64;
    for _ in 0..3 {
        let (th, ph, la) = (rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
        let v = teleport_with_state(th, ph, la);
        let target = oracle::u3(th, ph, la).column(0).into_owned();
        let mut seen = [false; 4];
        for seed in 0..400 {
            if seen.iter().all(|s| *s) {
                break;
            }
            let doc = run_value(&b, &v, seed)?;
            let branch = *counts(&doc, 0).keys().next().unwrap() as usize;
            if seen[branch] {
                continue;
            }
            seen[branch] = true;
            let psi = snapshot(&doc, 0, "teleported")?;
            let rho = oracle::reduced_qubit(&psi, psi.len().trailing_zeros() as usize, 2);
            let f = (target.adjoint() * &rho * &target)[(0, 0)].re;
            worst = worst.min(f);
            ensure(f > 1.0 - 1e-9, || format!("branch {branch:#x}: fidelity {f}"))?;
        }
        ensure(seen.iter().all(|s| *s), || format!("not every branch observed: {seen:?}"))?;
    }
    Ok(format!("chi2 {chi2:.2} (p {p:.3}), worst branch fidelity 1-{:.1e}", 1.0 - worst))
}

// 4

pub fn c4_repetition_code() -> Outcome {
    let start = Instant::now();
    let mut v = listing("35_repcode_qobj.json");
    v["config"]["bit_flip"] = json!({"probability": 0.03, "qubits": [0, 1, 2], "after_instructions": [2]});
    let doc = run_value(&backend("qasm_simulator"), &v, 4)?;
    let c = counts(&doc, 0);
    let band = |p: f64| 5.0 * (1000.0 * p * (1.0 - p)).sqrt();
    let get = |k: u64| c.get(&k).copied().unwrap_or(0);
    for k in [0x00, 0x1C] {
        let n = get(k);
        ensure((n as f64 - 455.0).abs() <= band(0.455), || format!("{k:#x}: {n} outside 455 ± 5σ"))?;
    }
    for k in [0x01, 0x02, 0x03, 0x1D, 0x1E, 0x1F] {
        let n = get(k);
        ensure((n as f64 - 15.0).abs() <= band(0.015), || format!("{k:#x}: {n} outside 15 ± 5σ"))?;
    }
    let t = within(Duration::from_secs(2), start, "repetition code")?;
    let shown: Vec<String> = c.iter().map(|(k, n)| format!("{k:#04x}:{n}")).collect();
    Ok(format!("{} in {t:.0?}", shown.join(" ")))
}

// 5

pub fn c5_rabi() -> Outcome {
    let start = Instant::now();
    let b = backend("rabi");
    let shots = 1000usize;

    let mut v = listing("81_rabi_level2_qobj.json");
    v["config"]["shots"] = json!(shots);
    let doc = run_value(&b, &v, 81)?;
    let c: Vec<BTreeMap<u64, u64>> = (0..3).map(|i| counts(&doc, i)).collect();
    ensure(c.iter().all(|m| m.keys().all(|k| *k <= 1)), || format!("keys outside {{0x0,0x1}}: {c:?}"))?;
    ensure(c[0].get(&0) == Some(&(shots as u64)), || format!("amplitude 0: {:?}", c[0]))?;
    ensure(c[2].get(&1) == Some(&(shots as u64)), || format!("amplitude 1.0: {:?}", c[2]))?;
    ensure(c[1].len() == 2, || format!("amplitude 0.5 not mixed: {:?}", c[1]))?;

    let mut v1 = listing("79_rabi_level1_qobj.json");
    v1["config"]["shots"] = json!(shots);
    v1["config"]["meas_return"] = json!("single");
    let d1 = run_value(&b, &v1, 79)?;
    let r = v1["config"]["memory_slots"].as_u64().unwrap() as usize;
    for (i, e) in d1.results.iter().enumerate() {
        let shape = match &e.data.memory {
            Some(MemoryData::Complex(ComplexArray::D2(m))) => oracle::shape2(m),
            other => return Err(format!("level 1 experiment {i}: memory {other:?}")),
        };
        ensure(shape == Some((shots, r)), || format!("level 1 experiment {i}: shape {shape:?}, want {shots}x{r}"))?;
    }

    let mut v0 = listing("77_rabi_level0_qobj.json");
    v0["config"]["shots"] = json!(shots);
    v0["config"]["meas_return"] = json!("single");
    let d0 = run_value(&b, &v0, 77)?;
    let l = v0["config"]["memory_slot_size"].as_u64().unwrap() as usize;
    for (i, e) in d0.results.iter().enumerate() {
        let shape = match &e.data.memory {
            Some(MemoryData::Complex(ComplexArray::D3(m))) => oracle::shape3(m),
            other => return Err(format!("level 0 experiment {i}: memory {other:?}")),
        };
        ensure(shape == Some((shots, r, l)), || format!("level 0 experiment {i}: shape {shape:?}, want {shots}x{r}x{l}"))?;
    }
    let t = within(Duration::from_secs(5), start, "Rabi")?;
    Ok(format!(
        "level 2 {:?} / {:?} / {:?}; level 1 {shots}x{r}; level 0 {shots}x{r}x{l}; {t:.0?}",
        c[0], c[1], c[2]
    ))
}

// 6

fn evaluate_listing(file: &str, osc_levels: usize) -> Result<qobj_emu::hamiltonian::eval::EvaluatedHamiltonian, String> {
    use qobj_emu::hamiltonian::HamiltonianSpec;
    let d = model::parse_hamiltonian_dict(listing(file)).map_err(|e| e.to_string())?;
    let spec = HamiltonianSpec::from_dict(&d).map_err(|e| e.to_string())?;
    let layout = spec.layout(2, 2, osc_levels).map_err(|e| e.to_string())?;
    spec.evaluate(&layout, 2).map_err(|e| e.to_string())
}

fn compare(what: &str, got: &Mat, want: &Mat) -> Result<f64, String> {
    ensure(got.shape() == want.shape(), || format!("{what}: shape {:?} vs {:?}", got.shape(), want.shape()))?;
    let d = (got - want).iter().fold(0.0f64, |m, x| m.max(x.norm()));
    ensure(d <= 1e-12, || format!("{what}: max entry difference {d:e}"))?;
    Ok(d)
}

pub fn c6_hamiltonian_oracle() -> Outcome {
    use oracle::{kron3, kron2, number, sigma_x, ladder_sum, eye};
    let two_pi = 2.0 * PI;
    let mut worst = 0.0f64;

    // qubit drive model: sum_i D_i X_i + 2 pi v_i O_i, N bound to 1
    let h = evaluate_listing("41_hamiltonian.json", 1)?;
    let (x0, x1) = (kron2(&sigma_x(), &eye(2)), kron2(&eye(2), &sigma_x()));
    let (o0, o1) = (kron2(&number(2), &eye(2)), kron2(&eye(2), &number(2)));
    let static_want = o0 * C64::from(two_pi * 5.0) + o1 * C64::from(two_pi * 5.25);
    worst = worst.max(compare("qubit model static", &h.static_part, &static_want)?);
    for (ch, m) in [("d0", &x0), ("d1", &x1)] {
        let got = h.drives.get(ch).ok_or_else(|| format!("qubit model: no channel {ch}; have {:?}", h.drives.keys()))?;
        worst = worst.max(compare(&format!("qubit model {ch}"), got, m)?);
    }
    ensure(h.drives.len() == 2, || format!("qubit model: channels {:?}", h.drives.keys()))?;

    // fixed-frequency qubits on a bus of 4 levels
    let lb = 4;
    let h = evaluate_listing("63_ffb_hamiltonian.json", lb)?;
    let i2 = eye(2);
    let ib = eye(lb);
    let x0 = kron3(&sigma_x(), &i2, &ib);
    let x1 = kron3(&i2, &sigma_x(), &ib);
    let o0 = kron3(&number(2), &i2, &ib);
    let o1 = kron3(&i2, &number(2), &ib);
    let nb = kron3(&i2, &i2, &number(lb));
    let xb = kron3(&i2, &i2, &ladder_sum(lb));
    let static_want = &o0 * C64::from(two_pi * 5.0)
        + &o1 * C64::from(two_pi * 5.1)
        + &nb * C64::from(two_pi * 6.0)
        + (&x0 * &xb) * C64::from(0.1)
        + (&x1 * &xb) * C64::from(0.1);
    worst = worst.max(compare("bus model static", &h.static_part, &static_want)?);
    for (ch, m) in [("d0", &x0), ("u0", &x0), ("d1", &x1), ("u1", &x1)] {
        let got = h.drives.get(ch).ok_or_else(|| format!("bus model: no channel {ch}; have {:?}", h.drives.keys()))?;
        worst = worst.max(compare(&format!("bus model {ch}"), got, m)?);
    }
    ensure(h.drives.len() == 4, || format!("bus model: channels {:?}", h.drives.keys()))?;
    Ok(format!("both models match the Kronecker builds, max deviation {worst:.1e}"))
}

// 7

pub fn c7_gate_algebra() -> Outcome {
    let mut g = GateSet::builtin();
    let swap_src = listing("04_gate_config_swap.json")["qasm_def"].as_str().unwrap().to_string();
    g.insert(parse_qasm_def(&swap_src).map_err(|e| e.to_string())?);
    let cases: [(&str, Mat, Mat); 3] = [
        ("u3(pi,0,pi) vs X", g.matrix("u3", &[PI, 0.0, PI], 1).map_err(|e| e.to_string())?, oracle::sigma_x()),
        ("u2(0,pi) vs H", g.matrix("u2", &[0.0, PI], 1).map_err(|e| e.to_string())?, oracle::hadamard()),
        ("swap def vs SWAP", g.matrix("swap", &[], 2).map_err(|e| e.to_string())?, oracle::swap()),
    ];
    let mut parts = vec![];
    for (what, got, want) in cases {
        let d = oracle::phase_distance(&got, &want);
        ensure(d <= 1e-10, || format!("{what}: distance {d:e}"))?;
        parts.push(format!("{what} {d:.0e}"));
    }
    Ok(parts.join(", "))
}

// 8

pub fn c8a_bfunc_truth_table() -> Outcome {
    let mut cases = 0u64;
    for width in 1..=8u32 {
        let top = 1u32 << width;
        let states: Vec<ClassicalState> = (0..top)
            .map(|reg| {
                let mut cl = ClassicalState::new(0, width as usize);
                for i in 0..width {
                    cl.registers[i as usize] = reg >> i & 1 == 1;
                }
                cl
            })
            .collect();
        for mask in 0..top {
            for val in 0..top {
                for rel in ["==", "!="] {
                    let b = Bfunc {
                        mask: format!("0x{mask:x}"),
                        relation: rel.into(),
                        val: format!("0x{val:x}"),
                        register: RegisterRef::One(0),
                        memory: None,
                    };
                    for (reg, cl) in states.iter().enumerate() {
                        let want = ((reg as u32 & mask) == val) == (rel == "==");
                        ensure(cl.bfunc_value(&b) == want, || {
                            format!("width {width} reg {reg:#x} mask {mask:#x} {rel} {val:#x}")
                        })?;
                        cases += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{cases} cases"))
}

/// A PULSE job on openpulse_2q with a valid config and no instructions.
pub fn empty_pulse_job(b: &Backend) -> Value {
    let q = json!({
        "qobj_id": "probe", "schema_version": "1.0", "type": "QASM",
        "config": {"shots": 1, "memory_slots": 1},
        "experiments": [{"instructions": []}]
    });
    let q = model::parse_qobj_value(q, Mode::Lenient).unwrap();
    let p = b.lower(&q.value).unwrap();
    let mut v = serde_json::to_value(&p).unwrap();
    v["experiments"][0]["instructions"] = json!([]);
    v
}

pub fn c8b_frame_change_group_law() -> Outcome {
    let b = backend("openpulse_2q");
    let base = empty_pulse_job(&b);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let state_of = |phases: &[f64]| -> Result<Vec<C64>, String> {
        let mut v = base.clone();
        let mut ins: Vec<Value> = phases.iter().map(|p| json!({"name": "fc", "ch": "d0", "t0": 0, "phase": p})).collect();
        ins.push(json!({"name": "pulse0", "ch": "d0", "t0": 0}));
        ins.push(json!({"name": "snapshot", "label": "s", "type": "state"}));
        v["experiments"][0]["instructions"] = Value::Array(ins);
        snapshot(&run_value(&b, &v, 1)?, 0, "s")
    };
    let still = state_of(&[0.0])?;
    let turned = state_of(&[PI / 2.0])?;
    let moved = still.iter().zip(&turned).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
    ensure(moved > 0.1, || format!("fc(pi/2) does not change the pulse outcome ({moved:e})"))?;
    for _ in 0..100 {
        let (a, c) = (rng.random_range(-2.0 * PI..2.0 * PI), rng.random_range(-2.0 * PI..2.0 * PI));
        let split = state_of(&[a, c])?;
        let joined = state_of(&[a + c])?;
        let d = split.iter().zip(&joined).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        worst = worst.max(d);
        ensure(d < 1e-10, || format!("fc({a})·fc({c}) vs fc({}): {d:e}", a + c))?;
    }
    Ok(format!("100 pairs, max state difference {worst:.1e}"))
}

pub fn c8c_norm_drift() -> Outcome {
    let b = backend("openpulse_2q");
    let mut v = empty_pulse_job(&b);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let len = 10_000;
    let mut lib = v["config"]["pulse_library"].as_array().cloned().unwrap_or_default();
    for ch in ["d0", "d1", "u0", "u1"] {
        let samples: Vec<[f64; 2]> = (0..len)
            .map(|_| {
                let (r, t) = (rng.random_range(0.0..0.7), rng.random_range(0.0..2.0 * PI));
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        lib.push(json!({"name": format!("noise_{ch}"), "samples": samples}));
    }
    v["config"]["pulse_library"] = Value::Array(lib);
    let mut ins: Vec<Value> = ["d0", "d1", "u0", "u1"]
        .iter()
        .map(|ch| json!({"name": format!("noise_{ch}"), "ch": ch, "t0": 0}))
        .collect();
    let marks = [2500u64, 5000, 7500, 10_000];
    for t in marks {
        ins.push(json!({"name": "snapshot", "label": format!("t{t}"), "type": "state", "t0": t}));
    }
    v["experiments"][0]["instructions"] = Value::Array(ins);
    let doc = run_value(&b, &v, 3)?;
    let mut worst = 0.0f64;
    for t in marks {
        let psi = snapshot(&doc, 0, &format!("t{t}"))?;
        let n = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max((n - 1.0).abs());
    }
    ensure(worst < 1e-9, || format!("norm drift {worst:e}"))?;
    Ok(format!("{len} random samples on 4 channels, drift {worst:.1e}"))
}

/// Random u1/u2/u3 circuit on qubit 0 as QASM instructions and its matrix.
fn random_circuit(rng: &mut ChaCha8Rng) -> (Vec<Value>, Mat) {
    let n = rng.random_range(1..=6);
    let mut u = oracle::eye(2);
    let mut ins = vec![];
    for _ in 0..n {
        let (name, p): (&str, Vec<f64>) = match rng.random_range(0..3) {
            0 => ("u1", vec![rng.random_range(-PI..PI)]),
            1 => ("u2", vec![rng.random_range(-PI..PI), rng.random_range(-PI..PI)]),
            _ => ("u3", vec![rng.random_range(0.0..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI)]),
        };
        let m = match name {
            "u1" => oracle::u3(0.0, 0.0, p[0]),
            "u2" => oracle::u3(PI / 2.0, p[0], p[1]),
            _ => oracle::u3(p[0], p[1], p[2]),
        };
        u = m * u;
        ins.push(json!({"name": name, "qubits": [0], "params": p}));
    }
    (ins, u)
}

pub fn c8d_lowering_preserves_semantics() -> Outcome {
    let b = backend("openpulse_2q");
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut worst = 1.0f64;
    for case in 0..50 {
        let (ins, u) = random_circuit(&mut rng);
        let q = json!({
            "qobj_id": format!("lower{case}"), "schema_version": "1.0", "type": "QASM",
            "config": {"shots": 1, "memory_slots": 1},
            "experiments": [{"instructions": ins}]
        });
        let parsed = model::parse_qobj_value(q, Mode::Lenient).map_err(|e| e.to_string())?;
        let lowered = b.lower(&parsed.value).map_err(|e| format!("case {case}: {e}"))?;
        let mut v = serde_json::to_value(&lowered).unwrap();
        let exp = &mut v["experiments"][0]["instructions"];
        // accumulated frame of d0, summed here from the lowered schedule
        let frame: f64 = exp
            .as_array()
            .unwrap()
            .iter()
            .filter(|i| i["name"] == "fc" && i["ch"] == "d0")
            .map(|i| i["phase"].as_f64().unwrap())
            .sum();
        exp.as_array_mut().unwrap().push(json!({"name": "snapshot", "label": "end", "type": "state"}));
        let psi = snapshot(&run_value(&b, &v, 1)?, 0, "end")?;
        let d = (psi.len() as f64).sqrt().round() as usize;
        // logical state: undo the virtual Z on the excited level of qubit 0
        let corrected: Vec<C64> = psi
            .iter()
            .enumerate()
            .map(|(i, a)| if i % d == 1 { a * C64::from_polar(1.0, -frame) } else { *a })
            .collect();
        let target = u.column(0);
        let overlap = target[0].conj() * corrected[0] + target[1].conj() * corrected[1];
        let f = overlap.norm_sqr();
        worst = worst.min(f);
        ensure(f > 1.0 - 1e-3, || format!("case {case}: fidelity {f}"))?;
    }
    Ok(format!("50 circuits, worst fidelity {worst:.6}"))
}

pub fn c8e_lifecycle_model_check() -> Outcome {
    let traces = super::lifecycle::run_traces(10_000, 0)?;
    Ok(format!("{} traces, {} transitions, none illegal", traces.traces, traces.transitions))
}

pub fn c8f_chunk_partition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut n = 0;
    for _ in 0..300 {
        let shots = rng.random_range(1..=2500u64);
        let chunk = rng.random_range(1..=900u64);
        super::chunks::check_partition(shots, chunk)?;
        n += 1;
    }
    super::chunks::check_partition(1000, 400)?;
    Ok(format!("{n} random (shots, chunk) pairs and 1000/400 partition exactly"))
}

pub fn c8_properties() -> Outcome {
    let parts: [Criterion; 6] = [
        ("bfunc", c8a_bfunc_truth_table),
        ("fc group law", c8b_frame_change_group_law),
        ("norm drift", c8c_norm_drift),
        ("lowering", c8d_lowering_preserves_semantics),
        ("lifecycle", c8e_lifecycle_model_check),
        ("chunks", c8f_chunk_partition),
    ];
    let mut ok = vec![];
    let mut bad = vec![];
    for (name, f) in parts {
        match f() {
            Ok(d) => ok.push(format!("{name}: {d}")),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    if bad.is_empty() {
        Ok(ok.join("; "))
    } else {
        Err(bad.join("; "))
    }
}

// 9

pub fn c9_service_end_to_end() -> Outcome {
    super::e2e::bell_over_http_matches_cli()
}
