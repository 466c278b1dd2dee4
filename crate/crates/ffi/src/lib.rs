//! C ABI over the emulator.
//!
//! Strings crossing the boundary are NUL-terminated UTF-8. Strings returned
//! through `out` pointers are owned by the caller and released with
//! [`qe_string_free`]. On failure a function returns a nonzero [`QeStatus`]
//! and [`qe_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use qobj_emu::backend::{Backend, Registry, RunOptions};
use qobj_emu::document::{check_document, detect_kind, CheckOptions, DocKind};
use qobj_emu::model::validate::Options;
use qobj_emu::model::{self, Mode, QobjType};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QeStatus {
    Ok = 0,
    /// A required pointer was NULL.
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON, or a document that does not fit the wire format.
    ParseError = 3,
    /// The document parsed but broke validation rules.
    Invalid = 4,
    /// No such backend or file.
    NotFound = 5,
    /// The engine failed while executing or lowering.
    EngineError = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

/// Opaque backend handle.
pub struct QeBackend {
    inner: Arc<Backend>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(QeStatus, String);

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QeStatus::Ok,
        Ok(Err(Fail(s, m))) => {
            set_error(&m);
            s
        }
        Err(_) => {
            set_error("internal error");
            QeStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(QeStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(QeStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn opt_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn backend<'a>(b: *const QeBackend) -> Result<&'a QeBackend, Fail> {
    b.as_ref().ok_or_else(|| Fail(QeStatus::NullArgument, "backend is NULL".into()))
}

unsafe fn put(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|e| Fail(QeStatus::Internal, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut *mut T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(QeStatus::NullArgument, "out is NULL".into()));
    }
    // SAFETY: caller passed a writable pointer
    unsafe { *out = ptr::null_mut() };
    Ok(())
}

fn parse_json(s: &str) -> Result<serde_json::Value, Fail> {
    model::parse::parse_json(s.as_bytes()).map_err(|e| Fail(QeStatus::ParseError, e.to_string()))
}

/// Opens a builtin backend by name, or a fixture file by path.
///
/// # Safety
/// `name_or_path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qe_backend_open(name_or_path: *const c_char, out: *mut *mut QeBackend) -> QeStatus {
    guard(|| {
        check_out(out)?;
        let spec = text(name_or_path, "name_or_path")?;
        let inner = match Registry::builtin().get(spec) {
            Some(b) => b.clone(),
            None if Path::new(spec).exists() => {
                Arc::new(Backend::from_file(Path::new(spec)).map_err(|e| Fail(QeStatus::ParseError, e.to_string()))?)
            }
            None => return Err(Fail(QeStatus::NotFound, format!("no backend {spec:?}"))),
        };
        *out = Box::into_raw(Box::new(QeBackend { inner }));
        Ok(())
    })
}

/// Builds a backend from a fixture document
/// (`{"configuration": ..., "defaults": ..., ...}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qe_backend_from_json(json: *const c_char, out: *mut *mut QeBackend) -> QeStatus {
    guard(|| {
        check_out(out)?;
        let v = parse_json(text(json, "json")?)?;
        let b = Backend::from_value("<memory>", v).map_err(|e| Fail(QeStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(QeBackend { inner: Arc::new(b) }));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `b` must come from `qe_backend_open` or `qe_backend_from_json` and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qe_backend_free(b: *mut QeBackend) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// The backend configuration as JSON.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qe_backend_configuration(b: *const QeBackend, out: *mut *mut c_char) -> QeStatus {
    guard(|| {
        check_out(out)?;
        let b = backend(b)?;
        put(out, model::to_json(&b.inner.configuration.to_value()))
    })
}

/// A description of the backend: plain text, or JSON when `as_json` is
/// nonzero.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qe_backend_describe(b: *const QeBackend, as_json: i32, out: *mut *mut c_char) -> QeStatus {
    guard(|| {
        check_out(out)?;
        let d = backend(b)?.inner.describe();
        let s = if as_json != 0 { model::to_json(&d) } else { d.render() };
        put(out, s)
    })
}

/// Checks a document. `kind` may be NULL to detect it; `b` may be NULL for
/// structure-only checks. The JSON report
/// `{"kind", "valid", "violations"}` is written to `out` whenever the
/// document parses, and the status is `QE_STATUS_INVALID` if it has errors.
///
/// # Safety
/// Pointers must be NULL where allowed or valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qe_validate(
    b: *const QeBackend,
    json: *const c_char,
    kind: *const c_char,
    strict: i32,
    out: *mut *mut c_char,
) -> QeStatus {
    guard(|| {
        check_out(out)?;
        let v = parse_json(text(json, "json")?)?;
        let kind = match opt_text(kind, "kind")? {
            Some(k) => k.parse::<DocKind>().map_err(|e| Fail(QeStatus::NotFound, e.to_string()))?,
            None => detect_kind(&v)
                .ok_or_else(|| Fail(QeStatus::ParseError, "cannot tell the document kind".into()))?,
        };
        let opts = CheckOptions {
            backend: b.as_ref().map(|b| &*b.inner),
            wrap_config: None,
            mode: if strict != 0 { Mode::Strict } else { Mode::Lenient },
            strict: strict != 0,
        };
        let c = check_document(kind, v, &opts).map_err(|e| Fail(QeStatus::ParseError, e.to_string()))?;
        put(out, c.summary().to_string())?;
        if c.report.has_errors() {
            let n = c.report.errors().count();
            return Err(Fail(QeStatus::Invalid, format!("{n} validation error(s)")));
        }
        Ok(())
    })
}

/// Validates and runs a Qobj. `seed` and `job_id` may be NULL. The result
/// document is written as compact JSON.
///
/// # Safety
/// `b` must be a live handle; strings NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qe_run(
    b: *const QeBackend,
    qobj_json: *const c_char,
    seed: *const u64,
    job_id: *const c_char,
    out: *mut *mut c_char,
) -> QeStatus {
    guard(|| {
        check_out(out)?;
        let b = &backend(b)?.inner;
        let raw = parse_json(text(qobj_json, "qobj_json")?)?;
        let q = model::parse_qobj_value(raw.clone(), Mode::Lenient)
            .map_err(|e| Fail(QeStatus::ParseError, e.to_string()))?;
        let r = b.validate(&q, &raw, Options::default());
        if let Some(first) = r.errors().next() {
            return Err(Fail(QeStatus::Invalid, first.to_string()));
        }
        let opts = RunOptions {
            job_id: opt_text(job_id, "job_id")?.map_or_else(|| q.qobj_id.clone(), str::to_string),
            date: None,
            seed: seed.as_ref().copied(),
            cancel: None,
        };
        let doc = b.run(&q, &opts).map_err(|e| Fail(QeStatus::EngineError, e.to_string()))?;
        put(out, model::to_json(&doc))
    })
}

/// Lowers a QASM Qobj to a PULSE Qobj through the backend's cmd_def.
///
/// # Safety
/// `b` must be a live handle; strings NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qe_lower(b: *const QeBackend, qobj_json: *const c_char, out: *mut *mut c_char) -> QeStatus {
    guard(|| {
        check_out(out)?;
        let b = &backend(b)?.inner;
        let raw = parse_json(text(qobj_json, "qobj_json")?)?;
        let q = model::parse_qobj_value(raw, Mode::Lenient).map_err(|e| Fail(QeStatus::ParseError, e.to_string()))?;
        if q.kind != QobjType::Qasm {
            return Err(Fail(QeStatus::Invalid, "only QASM jobs can be lowered".into()));
        }
        let p = b.lower(&q).map_err(|e| Fail(QeStatus::EngineError, e.to_string()))?;
        put(out, model::to_json(&p))
    })
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qe_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failure on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn qe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn qe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
