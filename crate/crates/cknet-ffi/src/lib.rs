//! C ABI over the cknet core: opaque net handles, status codes, and a
//! thread-local last-error message.
//!
//! Every function returns a [`CkStatus`]; on any non-OK status the caller
//! may fetch a human-readable message from [`cknet_last_error`]. Handles
//! created by the `cknet_net_*` constructors must be released with
//! [`cknet_net_free`].

use cknet::cli::SurfaceSpec;
use cknet::validate::{self, Check};
use cknet::{Error, QuadNet};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Status code of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CkStatus {
    CkOk = 0,
    /// Bad arguments or unknown parameter names.
    CkUsage = 1,
    /// File or JSON payload failed to parse.
    CkParse = 2,
    /// A net violates a structural invariant or failed validation.
    CkInvariant = 3,
    /// Numerical degeneracy (singular matrix, degenerate angle or quad).
    CkNumeric = 4,
    /// A required pointer argument was null.
    CkNullPointer = 5,
    /// Unexpected internal failure.
    CkInternal = 6,
}

/// Opaque quad-net handle.
pub struct CkNet {
    net: QuadNet,
}

/// Summary residuals of the standard checks at a given tolerance.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CkValidation {
    pub max_edge_residual: f64,
    pub max_curvature_defect: f64,
    pub max_cross_ratio_imag: f64,
    /// 1 when every residual is within tolerance.
    pub pass: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> CkStatus {
    match cknet::cli::exit_code(err) {
        1 => CkStatus::CkUsage,
        2 => CkStatus::CkParse,
        3 => CkStatus::CkInvariant,
        _ => CkStatus::CkNumeric,
    }
}

fn fail(err: &Error) -> CkStatus {
    set_error(&err.to_string());
    status_of(err)
}

fn guarded<F: FnOnce() -> CkStatus>(f: F) -> CkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            CkStatus::CkInternal
        }
    }
}

/// # Safety
/// `ptr` must be null or point to a NUL-terminated string valid for the
/// duration of the call.
unsafe fn cstr<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

/// Version string of the underlying library; statically allocated.
#[no_mangle]
pub extern "C" fn cknet_version() -> *const c_char {
    concat!("cknet ", env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cknet_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Generate a closed-form surface.
///
/// `surface` names the generator (`line`, `pseudosphere`, `dini`,
/// `pseudosphere-family`, `breather`, `kuen`); `params_json` optionally
/// carries the remaining parameters as a JSON object with the same keys as
/// the CLI flags (`dims` as "KxL", angles in radians), or may be null.
///
/// # Safety
/// `surface` and `params_json` must be null or valid NUL-terminated
/// strings; `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn cknet_generate(
    surface: *const c_char,
    params_json: *const c_char,
    out: *mut *mut CkNet,
) -> CkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return CkStatus::CkNullPointer;
        }
        let Some(surface) = cstr(surface) else {
            set_error("surface name is null or not UTF-8");
            return CkStatus::CkNullPointer;
        };
        let mut spec: SurfaceSpec = match cstr(params_json) {
            None => SurfaceSpec::default(),
            Some("") => SurfaceSpec::default(),
            Some(json) => match serde_json::from_str(json) {
                Ok(spec) => spec,
                Err(e) => {
                    set_error(&format!("params: {e}"));
                    return CkStatus::CkParse;
                }
            },
        };
        spec.surface = Some(surface.to_string());
        match spec.generate() {
            Ok((net, _)) => {
                *out = Box::into_raw(Box::new(CkNet { net }));
                CkStatus::CkOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Read a net from a JSON file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must point to
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn cknet_net_read_json(
    path: *const c_char,
    out: *mut *mut CkNet,
) -> CkStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return CkStatus::CkNullPointer;
        }
        let Some(path) = cstr(path) else {
            set_error("path is null or not UTF-8");
            return CkStatus::CkNullPointer;
        };
        match QuadNet::read_json(Path::new(path)) {
            Ok(net) => {
                *out = Box::into_raw(Box::new(CkNet { net }));
                CkStatus::CkOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Write a net to a JSON file.
///
/// # Safety
/// `net` must be a live handle from this library; `path` a valid string.
#[no_mangle]
pub unsafe extern "C" fn cknet_net_write_json(net: *const CkNet, path: *const c_char) -> CkStatus {
    guarded(|| {
        let (Some(net), Some(path)) = (net.as_ref(), cstr(path)) else {
            set_error("net or path is null");
            return CkStatus::CkNullPointer;
        };
        match net.net.write_json(Path::new(path)) {
            Ok(()) => CkStatus::CkOk,
            Err(e) => fail(&e),
        }
    })
}

/// Export a net as a Wavefront OBJ mesh.
///
/// # Safety
/// `net` must be a live handle from this library; `path` a valid string.
#[no_mangle]
pub unsafe extern "C" fn cknet_net_export_obj(net: *const CkNet, path: *const c_char) -> CkStatus {
    guarded(|| {
        let (Some(net), Some(path)) = (net.as_ref(), cstr(path)) else {
            set_error("net or path is null");
            return CkStatus::CkNullPointer;
        };
        match net.net.export_obj(Path::new(path)) {
            Ok(()) => CkStatus::CkOk,
            Err(e) => fail(&e),
        }
    })
}

/// Window size of a net.
///
/// # Safety
/// All pointers must be valid; `net` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cknet_net_dims(net: *const CkNet, k: *mut u32, l: *mut u32) -> CkStatus {
    guarded(|| {
        let Some(net) = net.as_ref() else {
            set_error("net is null");
            return CkStatus::CkNullPointer;
        };
        if k.is_null() || l.is_null() {
            set_error("dims out pointers are null");
            return CkStatus::CkNullPointer;
        }
        let (kk, ll) = net.net.dims();
        *k = kk as u32;
        *l = ll as u32;
        CkStatus::CkOk
    })
}

/// Position and unit normal of the vertex at (k, l); each output array
/// receives three doubles.
///
/// # Safety
/// `net` must be a live handle; `f` and `n` must each point to at least
/// three writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cknet_net_vertex(
    net: *const CkNet,
    k: u32,
    l: u32,
    f: *mut f64,
    n: *mut f64,
) -> CkStatus {
    guarded(|| {
        let Some(net) = net.as_ref() else {
            set_error("net is null");
            return CkStatus::CkNullPointer;
        };
        if f.is_null() || n.is_null() {
            set_error("vertex out pointers are null");
            return CkStatus::CkNullPointer;
        }
        let (kk, ll) = net.net.dims();
        if k as usize >= kk || l as usize >= ll {
            set_error("vertex index out of range");
            return CkStatus::CkUsage;
        }
        let fv = net.net.f(k as usize, l as usize);
        let nv = net.net.n(k as usize, l as usize);
        std::ptr::copy_nonoverlapping([fv.x, fv.y, fv.z].as_ptr(), f, 3);
        std::ptr::copy_nonoverlapping([nv.x, nv.y, nv.z].as_ptr(), n, 3);
        CkStatus::CkOk
    })
}

/// Run the standard checks (edge constraint, curvature defect |K + 1|,
/// cross-ratio circularity) and report the worst residuals.
///
/// # Safety
/// `net` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cknet_net_validate(
    net: *const CkNet,
    tol: f64,
    out: *mut CkValidation,
) -> CkStatus {
    guarded(|| {
        let Some(net) = net.as_ref() else {
            set_error("net is null");
            return CkStatus::CkNullPointer;
        };
        if out.is_null() {
            set_error("validation out pointer is null");
            return CkStatus::CkNullPointer;
        }
        let checks = [Check::EdgeConstraint, Check::Curvature, Check::Circularity];
        match validate::net_report(&net.net, &checks, Some(tol)) {
            Ok(report) => {
                let residual = |name: &str| {
                    report
                        .checks
                        .iter()
                        .find(|c| c.name == name)
                        .map(|c| c.max_residual)
                        .unwrap_or(f64::NAN)
                };
                *out = CkValidation {
                    max_edge_residual: residual("edge-constraint"),
                    max_curvature_defect: residual("curvature"),
                    max_cross_ratio_imag: residual("circularity"),
                    pass: report.pass() as u8,
                };
                CkStatus::CkOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a handle created by this library; null is a no-op.
///
/// # Safety
/// `net` must be null or a pointer previously returned by a `cknet_*`
/// constructor that has not been freed before.
#[no_mangle]
pub unsafe extern "C" fn cknet_net_free(net: *mut CkNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}
