use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use qobj_emu_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    qe_string_free(p);
    s
}

unsafe fn last_error() -> String {
    CStr::from_ptr(qe_last_error()).to_str().unwrap().to_string()
}

const BELL: &str = r#"{"qobj_id":"bell","schema_version":"1.0.0","type":"QASM",
"config":{"shots":100,"memory_slots":2},
"experiments":[{"instructions":[
{"name":"u2","qubits":[0],"params":[0,3.141592653589793]},
{"name":"cx","qubits":[0,1]},
{"name":"measure","qubits":[0,1],"memory":[0,1]}]}]}"#;

fn open(name: &str) -> *mut QeBackend {
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { qe_backend_open(c(name).as_ptr(), &mut b) }, QeStatus::Ok);
    b
}

#[test]
fn run_matches_library_and_is_deterministic() {
    let b = open("qasm_simulator");
    let seed = 5u64;
    let mut o1 = ptr::null_mut();
    let mut o2 = ptr::null_mut();
    unsafe {
        assert_eq!(qe_run(b, c(BELL).as_ptr(), &seed, ptr::null(), &mut o1), QeStatus::Ok);
        assert_eq!(qe_run(b, c(BELL).as_ptr(), &seed, ptr::null(), &mut o2), QeStatus::Ok);
        let (a, z) = (take(o1), take(o2));
        assert_eq!(a, z);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["job_id"], "bell");
        let counts = v["results"][0]["data"]["counts"].as_object().unwrap();
        let total: u64 = counts.values().map(|x| x.as_u64().unwrap()).sum();
        assert_eq!(total, 100);
        qe_backend_free(b);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(qe_backend_open(c("nope").as_ptr(), &mut b), QeStatus::NotFound);
        assert!(b.is_null());
        assert!(last_error().contains("nope"));
        assert_eq!(qe_backend_open(ptr::null(), &mut b), QeStatus::NullArgument);

        let b = open("ibmqx2");
        let mut out = ptr::null_mut();
        assert_eq!(qe_run(b, c("{").as_ptr(), ptr::null(), ptr::null(), &mut out), QeStatus::ParseError);
        let pulse = BELL.replace("\"QASM\"", "\"PULSE\"");
        assert_eq!(qe_run(b, c(&pulse).as_ptr(), ptr::null(), ptr::null(), &mut out), QeStatus::Invalid);
        assert!(out.is_null());
        qe_backend_free(b);
    }
}

#[test]
fn validate_reports_json() {
    unsafe {
        let lib = r#"[{"name": "p", "samples": [[1.2, 0.0]]}]"#;
        let mut out = ptr::null_mut();
        let s = qe_validate(ptr::null(), c(lib).as_ptr(), c("pulse_library").as_ptr(), 0, &mut out);
        assert_eq!(s, QeStatus::Invalid);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["valid"], false);
        assert_eq!(v["kind"], "pulse_library");

        let b = open("ibmqx2");
        let s = qe_validate(b, c(BELL).as_ptr(), ptr::null(), 0, &mut out);
        assert_eq!(s, QeStatus::Ok, "{}", take(out));
        qe_backend_free(b);
    }
}

#[test]
fn describe_configuration_and_lower() {
    unsafe {
        let b = open("openpulse_2q");
        let mut out = ptr::null_mut();
        assert_eq!(qe_backend_configuration(b, &mut out), QeStatus::Ok);
        let cfg: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(cfg["backend_name"], "openpulse_2q");
        assert_eq!(qe_backend_describe(b, 0, &mut out), QeStatus::Ok);
        assert!(take(out).contains("u0"));
        let u1 = BELL.replace(
            r#"{"name":"u2","qubits":[0],"params":[0,3.141592653589793]},
{"name":"cx","qubits":[0,1]},
{"name":"measure","qubits":[0,1],"memory":[0,1]}"#,
            r#"{"name":"u1","qubits":[0],"params":[0.5]}"#,
        );
        assert_eq!(qe_lower(b, c(&u1).as_ptr(), &mut out), QeStatus::Ok);
        let p: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(p["type"], "PULSE");
        let ins = p["experiments"][0]["instructions"].as_array().unwrap();
        assert_eq!(ins.len(), 1);
        assert_eq!(ins[0]["name"], "fc");
        qe_backend_free(b);
    }
}

#[test]
fn backend_from_json_round_trip() {
    let src = qobj_emu::backend::BUILTIN_BACKENDS[1].1;
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(qe_backend_from_json(c(src).as_ptr(), &mut b), QeStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(qe_backend_configuration(b, &mut out), QeStatus::Ok);
        assert!(take(out).contains("qasm_simulator"));
        qe_backend_free(b);
        assert_eq!(qe_backend_from_json(c("{}").as_ptr(), &mut b), QeStatus::ParseError);
    }
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(qe_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qobj_emu.h")).unwrap();
    for f in [
        "qe_backend_open", "qe_backend_from_json", "qe_backend_free", "qe_backend_configuration",
        "qe_backend_describe", "qe_validate", "qe_run", "qe_lower", "qe_string_free", "qe_last_error", "qe_version",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(h.contains("typedef struct QeBackend QeBackend;"));
}

/// Compiles and runs a C program against the static library.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libqobj_emu_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("smoke");
    let st = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(st.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"counts\""));
}
