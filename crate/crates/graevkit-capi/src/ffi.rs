//! Exported C functions. Handles are opaque pointers owned by Rust; every
//! returned string must be released with [`graev_string_free`], and the
//! last failure message is retrievable via [`graev_last_error`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use graevkit::rational::{format_rational, parse_rational};
use graevkit::{
    certificate_for, free_distance, free_norm, graev_distance, kantorovich_distance,
    psd_check, round_to_integer_plan, schoenberg_gram, validate_space, verify_certificate,
    Certificate, Chain, Error, PointedMetricSpace, RawMeasure, SpaceRef, TransportPlan, Word,
};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraevStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// Input could not be parsed.
    Parse = 3,
    /// The computation rejected the input (invalid metric, infeasible
    /// data, failed verification).
    Domain = 4,
    /// An internal panic was caught; this is a bug.
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> GraevStatus {
    match err {
        Error::ParseRational(_) | Error::ParseInput(_) => GraevStatus::Parse,
        _ => GraevStatus::Domain,
    }
}

/// Opaque handle to a validated pointed metric space.
pub struct GraevSpace {
    inner: SpaceRef,
}

// --- helpers ---------------------------------------------------------------

unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, GraevStatus> {
    if ptr.is_null() {
        set_error("null pointer argument".into());
        return Err(GraevStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        GraevStatus::Utf8
    })
}

fn out_string(out: *mut *mut c_char, value: String) -> GraevStatus {
    let c = match CString::new(value) {
        Ok(c) => c,
        Err(_) => {
            set_error("output contained NUL".into());
            return GraevStatus::Panic;
        }
    };
    unsafe { *out = c.into_raw() };
    GraevStatus::Ok
}

fn guard<F: FnOnce() -> GraevStatus>(f: F) -> GraevStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".into());
            GraevStatus::Panic
        }
    }
}

unsafe fn space_ref<'a>(space: *const GraevSpace) -> Result<&'a SpaceRef, GraevStatus> {
    if space.is_null() {
        set_error("null space handle".into());
        return Err(GraevStatus::NullPointer);
    }
    Ok(&(*space).inner)
}

fn parse_space(json: &str) -> Result<SpaceRef, GraevStatus> {
    let space: PointedMetricSpace = serde_json::from_str(json).map_err(|e| {
        set_error(format!("cannot parse space: {e}"));
        GraevStatus::Parse
    })?;
    let report = validate_space(&space);
    if !report.ok {
        let first = &report.violations[0];
        set_error(format!(
            "invalid metric: {} violated at {:?}",
            first.axiom, first.indices
        ));
        return Err(GraevStatus::Domain);
    }
    Ok(Arc::new(space))
}

fn parse_chain(space: &SpaceRef, json: &str) -> Result<Chain, GraevStatus> {
    let raw: BTreeMap<String, String> = serde_json::from_str(json).map_err(|e| {
        set_error(format!("cannot parse chain: {e}"));
        GraevStatus::Parse
    })?;
    let mut coeffs = Vec::with_capacity(raw.len());
    for (point, value) in raw {
        let coeff = parse_rational(&value).map_err(|e| {
            set_error(e.to_string());
            GraevStatus::Parse
        })?;
        coeffs.push((point, coeff));
    }
    Chain::new(space, coeffs).map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn parse_word(space: &SpaceRef, json: &str) -> Result<Word, GraevStatus> {
    let raw: BTreeMap<String, i64> = serde_json::from_str(json).map_err(|e| {
        set_error(format!("cannot parse word: {e}"));
        GraevStatus::Parse
    })?;
    Word::new(space, raw).map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

// --- exported API ----------------------------------------------------------

/// Parse and fully validate a space from its JSON form. On success stores a
/// heap-allocated handle in `out`; release it with [`graev_space_free`].
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn graev_space_parse(
    json: *const c_char,
    out: *mut *mut GraevSpace,
) -> GraevStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer".into());
            return GraevStatus::NullPointer;
        }
        let json = match cstr(json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match parse_space(json) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(GraevSpace { inner }));
                GraevStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Release a space handle. Null is a no-op.
///
/// # Safety
/// `space` must have come from [`graev_space_parse`] and not been freed.
#[no_mangle]
pub unsafe extern "C" fn graev_space_free(space: *mut GraevSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Number of points in the space.
///
/// # Safety
/// `space` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn graev_space_len(
    space: *const GraevSpace,
    out: *mut usize,
) -> GraevStatus {
    guard(|| {
        let space = match space_ref(space) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null out pointer".into());
            return GraevStatus::NullPointer;
        }
        *out = space.len();
        GraevStatus::Ok
    })
}

/// Validate a space JSON document without building a handle; writes the
/// validation report as JSON to `out_report` even when axioms fail.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out_report` valid.
#[no_mangle]
pub unsafe extern "C" fn graev_validate_space_json(
    json: *const c_char,
    out_report: *mut *mut c_char,
) -> GraevStatus {
    guard(|| {
        if out_report.is_null() {
            set_error("null out pointer".into());
            return GraevStatus::NullPointer;
        }
        let json = match cstr(json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let space: PointedMetricSpace = match serde_json::from_str(json) {
            Ok(s) => s,
            Err(e) => {
                set_error(format!("cannot parse space: {e}"));
                return GraevStatus::Parse;
            }
        };
        let report = validate_space(&space);
        let json = serde_json::to_string(&report).expect("report serializes");
        out_string(out_report, json)
    })
}

/// Transport norm of a chain, as a canonical rational string.
///
/// # Safety
/// `space` must be a live handle; strings NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn graev_norm(
    space: *const GraevSpace,
    chain_json: *const c_char,
    out: *mut *mut c_char,
) -> GraevStatus {
    guard(|| {
        let space = match space_ref(space) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let chain_json = match cstr(chain_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null out pointer".into());
            return GraevStatus::NullPointer;
        }
        let chain = match parse_chain(space, chain_json) {
            Ok(c) => c,
            Err(status) => return status,
        };
        match free_norm(space, &chain) {
            Ok(value) => out_string(out, format_rational(&value)),
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Norm distance between two chains, as a canonical rational string.
///
/// # Safety
/// As for [`graev_norm`].
#[no_mangle]
pub unsafe extern "C" fn graev_chain_distance(
    space: *const GraevSpace,
    chain_a_json: *const c_char,
    chain_b_json: *const c_char,
    out: *mut *mut c_char,
) -> GraevStatus {
    guard(|| {
        let space = match space_ref(space) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let (a, b) = match (cstr(chain_a_json), cstr(chain_b_json)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(status), _) | (_, Err(status)) => return status,
        };
        if out.is_null() {
            set_error("null out pointer".into());
            return GraevStatus::NullPointer;
        }
        let a = match parse_chain(space, a) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let b = match parse_chain(space, b) {
            Ok(c) => c,
            Err(status) => return status,
        };
        match free_distance(space, &a, &b) {
            Ok(value) => out_string(out, format_rational(&value)),
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Transport distance between two probability measures (JSON weight maps),
/// as a canonical rational string.
///
/// # Safety
/// As for [`graev_norm`].
#[no_mangle]
pub unsafe extern "C" fn graev_kantorovich(
    space: *const GraevSpace,
    mu1_json: *const c_char,
    mu2_json: *const c_char,
    out: *mut *mut c_char,
) -> GraevStatus {
    guard(|| {
        let space = match space_ref(space) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let (a, b) = match (cstr(mu1_json), cstr(mu2_json)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(status), _) | (_, Err(status)) => return status,
        };
        if out.is_null() {
            set_error("null out pointer".into());
            return GraevStatus::NullPointer;
        }
        let parse = |text: &str| -> Result<graevkit::ProbMeasure, GraevStatus> {
            let raw: RawMeasure = serde_json::from_str(text).map_err(|e| {
                set_error(format!("cannot parse measure: {e}"));
                GraevStatus::Parse
            })?;
            raw.resolve(space).map_err(|e| {
                set_error(e.to_string());
                status_of(&e)
            })
        };
        let mu1 = match parse(a) {
            Ok(m) => m,
            Err(status) => return status,
        };
        let mu2 = match parse(b) {
            Ok(m) => m,
            Err(status) => return status,
        };
        match kantorovich_distance(space, &mu1, &mu2) {
            Ok(value) => out_string(out, format_rational(&value)),
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Word metric between two integer words; `v_json` may be null for the
/// zero word. Result is a canonical rational string.
///
/// # Safety
/// As for [`graev_norm`]; `v_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn graev_word_distance(
    space: *const GraevSpace,
    u_json: *const c_char,
    v_json: *const c_char,
    out: *mut *mut c_char,
) -> GraevStatus {
    guard(|| {
        let space = match space_ref(space) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let u = match cstr(u_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null out pointer".into());
            return GraevStatus::NullPointer;
        }
        let u = match parse_word(space, u) {
            Ok(w) => w,
            Err(status) => return status,
        };
        let v = if v_json.is_null() {
            Word::zero()
        } else {
            let text = match cstr(v_json) {
                Ok(s) => s,
                Err(status) => return status,
            };
            match parse_word(space, text) {
                Ok(w) => w,
                Err(status) => return status,
            }
        };
        match graev_distance(space, &u, &v) {
            Ok(value) => out_string(out, format_rational(&value)),
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Solve a chain and return the optimality certificate as JSON.
///
/// # Safety
/// As for [`graev_norm`].
#[no_mangle]
pub unsafe extern "C" fn graev_dual_certificate(
    space: *const GraevSpace,
    chain_json: *const c_char,
    out: *mut *mut c_char,
) -> GraevStatus {
    guard(|| {
        let space = match space_ref(space) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let chain_json = match cstr(chain_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null out pointer".into());
            return GraevStatus::NullPointer;
        }
        let chain = match parse_chain(space, chain_json) {
            Ok(c) => c,
            Err(status) => return status,
        };
        match certificate_for(space, &chain) {
            Ok(cert) => out_string(out, serde_json::to_string(&cert).expect("certificate serializes")),
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Re-check a certificate. `out_ok` is set to true when every check
/// passes; on false, the first failure is available via
/// [`graev_last_error`].
///
/// # Safety
/// As for [`graev_norm`]; `out_ok` must be valid.
#[no_mangle]
pub unsafe extern "C" fn graev_verify_certificate(
    space: *const GraevSpace,
    cert_json: *const c_char,
    out_ok: *mut bool,
) -> GraevStatus {
    guard(|| {
        let space = match space_ref(space) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let cert_json = match cstr(cert_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out_ok.is_null() {
            set_error("null out pointer".into());
            return GraevStatus::NullPointer;
        }
        let cert: Certificate = match serde_json::from_str(cert_json) {
            Ok(c) => c,
            Err(e) => {
                set_error(format!("cannot parse certificate: {e}"));
                return GraevStatus::Parse;
            }
        };
        match verify_certificate(space, &cert) {
            Ok(failures) => {
                *out_ok = failures.is_empty();
                if let Some(first) = failures.first() {
                    set_error(first.clone());
                }
                GraevStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Round a fractional plan (JSON array of [source, sink, mass] triples)
/// with integer divergences to an integer plan; returns the rounded plan
/// as the same JSON triple form.
///
/// # Safety
/// As for [`graev_norm`].
#[no_mangle]
pub unsafe extern "C" fn graev_round_plan(
    space: *const GraevSpace,
    plan_json: *const c_char,
    out: *mut *mut c_char,
) -> GraevStatus {
    guard(|| {
        let space = match space_ref(space) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let plan_json = match cstr(plan_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null out pointer".into());
            return GraevStatus::NullPointer;
        }
        let triples: Vec<(String, String, String)> = match serde_json::from_str(plan_json) {
            Ok(t) => t,
            Err(e) => {
                set_error(format!("cannot parse plan: {e}"));
                return GraevStatus::Parse;
            }
        };
        let plan = match TransportPlan::from_named_triples(space.clone(), &triples) {
            Ok(p) => p,
            Err(e) => {
                set_error(e.to_string());
                return status_of(&e);
            }
        };
        match round_to_integer_plan(&plan) {
            Ok(rounded) => out_string(
                out,
                serde_json::to_string(&rounded.to_named_triples()).expect("plan serializes"),
            ),
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Smallest eigenvalue of the exponential kernel matrix over a JSON point
/// sample (array of coordinate arrays) for exponent `p`.
///
/// # Safety
/// `points_json` must be NUL-terminated; `out_min_eigenvalue` valid.
#[no_mangle]
pub unsafe extern "C" fn graev_schoenberg_min_eigenvalue(
    points_json: *const c_char,
    p: f64,
    tol: f64,
    out_min_eigenvalue: *mut f64,
) -> GraevStatus {
    guard(|| {
        let text = match cstr(points_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out_min_eigenvalue.is_null() {
            set_error("null out pointer".into());
            return GraevStatus::NullPointer;
        }
        let points: Vec<Vec<f64>> = match serde_json::from_str(text) {
            Ok(p) => p,
            Err(e) => {
                set_error(format!("cannot parse points: {e}"));
                return GraevStatus::Parse;
            }
        };
        let gram = match schoenberg_gram(&points, p) {
            Ok(g) => g,
            Err(e) => {
                set_error(e.to_string());
                return status_of(&e);
            }
        };
        match psd_check(&graevkit::complexify(&gram), tol) {
            Ok((_, min)) => {
                *out_min_eigenvalue = min;
                GraevStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must have been returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn graev_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The last error message on this thread, or null if none. Caller frees
/// with [`graev_string_free`].
#[no_mangle]
pub extern "C" fn graev_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(c) => c.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}
