//! C ABI over the `defmatch` engine.
//!
//! Graphs and matchings cross the boundary as opaque handles; exact values
//! cross as NUL-terminated strings in the scalar text form. Every function
//! returns a [`DmStatus`], and on failure [`dm_last_error`] describes it.
//! Strings returned through out-parameters are owned by the caller and must be
//! released with [`dm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use defmatch::flipper::epsilon_matching;
use defmatch::gallery::{make_laczkovich, make_rot};
use defmatch::graph::uncovered_both;
use defmatch::{io, DefinableBipartiteGraph, Error, Matching, Scalar};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    Null = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// Malformed input text (JSON, scalar, unknown name).
    Parse = 3,
    /// The computation failed on valid input.
    Domain = 4,
    /// An iteration bound was exceeded.
    Bound = 5,
    /// Internal panic, caught at the boundary.
    Panic = 6,
}

/// Opaque graph handle.
pub struct DmGraph(DefinableBipartiteGraph);

/// Opaque matching handle; only meaningful together with the graph it was built for.
pub struct DmMatching(Matching);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(DmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse(_) | Error::ScalarParse(_) | Error::Json(_) => DmStatus::Parse,
            Error::IterationCapExceeded { .. } => DmStatus::Bound,
            _ => DmStatus::Domain,
        };
        Fail(status, e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> DmStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DmStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            DmStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(DmStatus::Null, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(DmStatus::Utf8, format!("{what} is not UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(DmStatus::Null, format!("{what} is null")))
}

unsafe fn out_ptr<T>(p: *mut *mut T, what: &str) -> Result<&'static mut *mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(DmStatus::Null, format!("{what} is null")))
}

fn scalar(s: &str) -> Result<Scalar, Fail> {
    s.parse().map_err(Fail::from)
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior NUL").into_raw()
}

/// Parses a graph file's JSON text into a new handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dm_graph_parse_json(json: *const c_char, out: *mut *mut DmGraph) -> DmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let g = io::parse_graph(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(DmGraph(g)));
        Ok(())
    })
}

/// Builds a gallery graph: `"rot"` or `"laczkovich"`. `param` may be null for
/// the default `rt2 - 1`.
///
/// # Safety
/// `name` must be a valid string, `param` null or a valid string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dm_graph_gallery(name: *const c_char, param: *const c_char, out: *mut *mut DmGraph) -> DmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let p = if param.is_null() { Scalar::sqrt2() - Scalar::one() } else { scalar(text(param, "param")?)? };
        let g = match text(name, "name")? {
            "rot" => make_rot(p)?,
            "laczkovich" => make_laczkovich(p)?,
            other => return Err(Fail(DmStatus::Parse, format!("unknown gallery graph {other:?}"))),
        };
        *out = Box::into_raw(Box::new(DmGraph(g)));
        Ok(())
    })
}

/// Releases a graph handle. Null is ignored.
///
/// # Safety
/// `g` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn dm_graph_free(g: *mut DmGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Writes the number of structural violations of `g` to `count`.
/// The status is `DM_STATUS_OK` even when violations exist; the first one is
/// then described by [`dm_last_error`].
///
/// # Safety
/// `g` must be a live handle and `count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dm_graph_validate(g: *const DmGraph, count: *mut usize) -> DmStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let count = count.as_mut().ok_or_else(|| Fail(DmStatus::Null, "count is null".into()))?;
        let v = g.0.validate();
        *count = v.len();
        if let Some(first) = v.first() {
            set_error(&first.to_string());
        }
        Ok(())
    })
}

/// Serializes a graph to JSON.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dm_graph_to_json(g: *const DmGraph, out: *mut *mut c_char) -> DmStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let out = out_ptr(out, "out")?;
        *out = owned_string(io::graph_to_json(&g.0));
        Ok(())
    })
}

/// Computes a matching leaving less than `eps` (scalar text) uncovered.
///
/// # Safety
/// `g` must be a live handle, `eps` a valid string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dm_epsilon_matching(g: *const DmGraph, eps: *const c_char, out: *mut *mut DmMatching) -> DmStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let eps = scalar(text(eps, "eps")?)?;
        let (m, _, _) = epsilon_matching(&g.0, &eps)?;
        *out = Box::into_raw(Box::new(DmMatching(m)));
        Ok(())
    })
}

/// Parses matching JSON against `g`.
///
/// # Safety
/// `g` must be a live handle, `json` a valid string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dm_matching_parse_json(
    g: *const DmGraph,
    json: *const c_char,
    out: *mut *mut DmMatching,
) -> DmStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let m = io::parse_matching(&g.0, text(json, "json")?)?;
        *out = Box::into_raw(Box::new(DmMatching(m)));
        Ok(())
    })
}

/// Exact measure of the vertices of `g` left uncovered by `m`, as scalar text.
///
/// # Safety
/// `g`, `m` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dm_matching_uncovered_measure(
    g: *const DmGraph,
    m: *const DmMatching,
    out: *mut *mut c_char,
) -> DmStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let m = deref(m, "matching")?;
        let out = out_ptr(out, "out")?;
        *out = owned_string(uncovered_both(&g.0, &m.0).measure().to_string());
        Ok(())
    })
}

/// Serializes a matching to JSON, naming edges by their ids in `g`.
///
/// # Safety
/// `g`, `m` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dm_matching_to_json(g: *const DmGraph, m: *const DmMatching, out: *mut *mut c_char) -> DmStatus {
    guard(|| {
        let g = deref(g, "graph")?;
        let m = deref(m, "matching")?;
        let out = out_ptr(out, "out")?;
        *out = owned_string(io::matching_to_json(&g.0, &m.0));
        Ok(())
    })
}

/// Releases a matching handle. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn dm_matching_free(m: *mut DmMatching) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn dm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failing call on this thread; empty after a success
/// (except for the diagnostic left by [`dm_graph_validate`]).
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn dm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
