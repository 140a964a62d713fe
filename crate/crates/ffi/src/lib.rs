//! C ABI over `compartdb`.
//!
//! Models and databases are opaque handles owned by the caller and released
//! with their `*_free` function. Every fallible call returns a
//! [`CdbStatus`]; on failure `cdb_last_error` describes the problem for the
//! calling thread. Strings returned through `char **` out-parameters are
//! NUL-terminated UTF-8 and must be released with `cdb_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use compartdb::db::{Database, DbError};
use compartdb::identifiability::{assess_model, AssessConfig, IdStatus};
use compartdb::model::{canonicalize, parse_model, Model, ParamKey};

/// Result codes. Values are stable.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdbStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    NotFound = 4,
    Assessment = 5,
    Io = 6,
    Panic = 7,
}

/// Opaque model handle.
pub struct CdbModel(Model);

/// Opaque database handle.
pub struct CdbDatabase(Database);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: CdbStatus, msg: impl AsRef<str>) -> CdbStatus {
    set_error(msg.as_ref());
    status
}

fn guard(f: impl FnOnce() -> CdbStatus) -> CdbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == CdbStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(CdbStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, CdbStatus> {
    if s.is_null() {
        return Err(fail(CdbStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(CdbStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> CdbStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            CdbStatus::Ok
        }
        Err(_) => fail(CdbStatus::Panic, "interior NUL in output"),
    }
}

fn statuses_json(r: &std::collections::BTreeMap<ParamKey, IdStatus>) -> String {
    let map: serde_json::Map<String, serde_json::Value> = r
        .iter()
        .map(|(k, v)| (k.to_string(), serde_json::Value::from(v.as_str())))
        .collect();
    serde_json::Value::Object(map).to_string()
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cdb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cdb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a model string such as `graph=[[],[0]];in=[0];out=[0];leak=[0]`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cdb_model_parse(text: *const c_char, out: *mut *mut CdbModel) -> CdbStatus {
    guard(|| {
        if out.is_null() {
            return fail(CdbStatus::NullArgument, "null output pointer");
        }
        let s = match read_str(text) {
            Ok(s) => s,
            Err(e) => return e,
        };
        match parse_model(s) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(CdbModel(m)));
                CdbStatus::Ok
            }
            Err(e) => fail(CdbStatus::Parse, e.to_string()),
        }
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must come from `cdb_model_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cdb_model_free(model: *mut CdbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of compartments.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cdb_model_nodes(model: *const CdbModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n())
}

/// Canonical model string (the database key).
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cdb_model_canonical(model: *const CdbModel, out: *mut *mut c_char) -> CdbStatus {
    guard(|| {
        let (Some(m), false) = (model.as_ref(), out.is_null()) else {
            return fail(CdbStatus::NullArgument, "null argument");
        };
        write_string(out, canonicalize(&m.0).key)
    })
}

/// Assesses a model directly. `out` receives a JSON object mapping parameter
/// names to `"globally"`, `"locally"` or `"nonidentifiable"`.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cdb_assess(model: *const CdbModel, seed: u64, out: *mut *mut c_char) -> CdbStatus {
    guard(|| {
        let (Some(m), false) = (model.as_ref(), out.is_null()) else {
            return fail(CdbStatus::NullArgument, "null argument");
        };
        let cfg = AssessConfig {
            seed,
            ..AssessConfig::default()
        };
        match assess_model(&m.0, &cfg) {
            Ok(r) => write_string(out, statuses_json(&r)),
            Err(e) => fail(CdbStatus::Assessment, e.to_string()),
        }
    })
}

/// Loads a database directory.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cdb_db_open(path: *const c_char, out: *mut *mut CdbDatabase) -> CdbStatus {
    guard(|| {
        if out.is_null() {
            return fail(CdbStatus::NullArgument, "null output pointer");
        }
        let p = match read_str(path) {
            Ok(s) => s,
            Err(e) => return e,
        };
        match Database::load(Path::new(p)) {
            Ok(db) => {
                *out = Box::into_raw(Box::new(CdbDatabase(db)));
                CdbStatus::Ok
            }
            Err(e) => fail(CdbStatus::Io, e.to_string()),
        }
    })
}

/// Releases a database handle. Null is ignored.
///
/// # Safety
/// `db` must come from `cdb_db_open` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cdb_db_free(db: *mut CdbDatabase) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// Number of records.
///
/// # Safety
/// `db` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cdb_db_len(db: *const CdbDatabase) -> usize {
    db.as_ref().map_or(0, |d| d.0.len())
}

/// Looks up a model; statuses are reported in the model's own labeling,
/// in the same JSON shape as `cdb_assess`.
///
/// # Safety
/// `db` and `model` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cdb_db_query(
    db: *const CdbDatabase,
    model: *const CdbModel,
    out: *mut *mut c_char,
) -> CdbStatus {
    guard(|| {
        let (Some(d), Some(m), false) = (db.as_ref(), model.as_ref(), out.is_null()) else {
            return fail(CdbStatus::NullArgument, "null argument");
        };
        match d.0.get(&m.0) {
            Ok(r) => write_string(out, statuses_json(&r)),
            Err(e @ DbError::NotFound(_)) => fail(CdbStatus::NotFound, e.to_string()),
            Err(e) => fail(CdbStatus::Io, e.to_string()),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cdb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
