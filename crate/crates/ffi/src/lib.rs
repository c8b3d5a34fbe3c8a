//! C ABI over the solver, verifier, and price construction.
//!
//! Instances travel as the same JSON documents the command-line tool reads;
//! parsed instances live behind an opaque handle. All functions return a
//! [`TtcStatus`]; output strings are allocated here and must be released
//! with [`ttc_string_free`]. After any `TTC_STATUS_INVALID_INPUT` result,
//! [`ttc_last_error_message`] yields a human-readable diagnostic for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use ttcnet::core_verify::{
    cap_find_blocking, enumerate_core, find_blocking_coalition, EnumerateError,
    EnumerateOptions, FeasibilityMode,
};
use ttcnet::format::{
    cap_certificate_section, core_enumeration_file, network_certificate_section,
    parse_instance, parse_result, to_canonical_json, ParsedInstance, ResultFile,
};
use ttcnet::model::{is_feasible_allocation, is_feasible_network};
use ttcnet::prices::{personalized_prices, verify_price_properties};
use ttcnet::{solve_cap, solve_network, EmptyBundlePolicy};

/// Outcome of an FFI call. Mirrors the command-line exit codes for the
/// shared cases.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TtcStatus {
    /// Success; for verification, the candidate is in the core.
    Ok = 0,
    /// The candidate is blocked; the certificate names the coalition.
    Blocked = 1,
    /// Input could not be parsed or violates an invariant.
    InvalidInput = 2,
    /// Enumeration refused: the search space exceeds the cap.
    Refused = 3,
    /// A price property failed on the priced outcome.
    PropertyFailed = 4,
    /// A required pointer argument was null.
    NullArgument = 5,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 6,
    /// Unexpected internal failure.
    Internal = 7,
}

/// Opaque parsed instance.
pub struct TtcInstance {
    inner: ParsedInstance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).ok();
    });
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

/// Most recent diagnostic for this thread, or null. The caller owns the
/// returned string and must free it with [`ttc_string_free`].
#[no_mangle]
pub extern "C" fn ttc_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(message) => message.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn ttc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string allocated by this library. Null is ignored.
///
/// # Safety
/// `s` must be a pointer previously returned by one of these functions and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ttc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, TtcStatus> {
    if ptr.is_null() {
        return Err(TtcStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error("argument is not valid UTF-8".to_string());
        TtcStatus::InvalidUtf8
    })
}

fn emit(out: *mut *mut c_char, text: String) -> TtcStatus {
    let Ok(cstring) = CString::new(text) else {
        set_last_error("output contained an interior NUL byte".to_string());
        return TtcStatus::Internal;
    };
    unsafe {
        *out = cstring.into_raw();
    }
    TtcStatus::Ok
}

fn guarded<F: FnOnce() -> TtcStatus>(f: F) -> TtcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic".to_string());
            TtcStatus::Internal
        }
    }
}

/// Parses an instance document into a handle. On success `*out` owns the
/// instance; release it with [`ttc_instance_free`].
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ttc_instance_parse(
    json: *const c_char,
    out: *mut *mut TtcInstance,
) -> TtcStatus {
    guarded(|| {
        if out.is_null() {
            return TtcStatus::NullArgument;
        }
        let text = match utf8_arg(json) {
            Ok(text) => text,
            Err(status) => return status,
        };
        clear_last_error();
        match parse_instance(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(TtcInstance { inner }));
                TtcStatus::Ok
            }
            Err(err) => {
                set_last_error(err.to_string());
                TtcStatus::InvalidInput
            }
        }
    })
}

/// Releases an instance handle. Null is ignored.
///
/// # Safety
/// `instance` must come from [`ttc_instance_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ttc_instance_free(instance: *mut TtcInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of agents in the instance; 0 for a null handle.
///
/// # Safety
/// `instance` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ttc_agent_count(instance: *const TtcInstance) -> usize {
    if instance.is_null() {
        return 0;
    }
    match &(*instance).inner {
        ParsedInstance::Network(inst) => inst.agent_count(),
        ParsedInstance::Cap(inst) => inst.agent_count(),
    }
}

/// Solves the instance and writes the result document to `*out_json`
/// (assignments and stage count; the full trace when `include_trace`).
///
/// # Safety
/// `instance` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ttc_solve(
    instance: *const TtcInstance,
    include_trace: bool,
    out_json: *mut *mut c_char,
) -> TtcStatus {
    guarded(|| {
        if instance.is_null() || out_json.is_null() {
            return TtcStatus::NullArgument;
        }
        clear_last_error();
        let file = match &(*instance).inner {
            ParsedInstance::Network(inst) => {
                let (net, trace) = solve_network(inst).expect("parsed instances are valid");
                let base = ResultFile::for_network(&net).with_stages(trace.stages);
                if include_trace {
                    base.with_trace(&trace)
                } else {
                    base
                }
            }
            ParsedInstance::Cap(inst) => {
                let (alloc, trace) = solve_cap(inst).expect("parsed instances are valid");
                let base = ResultFile::for_allocation(&alloc).with_stages(trace.stages);
                if include_trace {
                    base.with_trace(&trace)
                } else {
                    base
                }
            }
        };
        match to_canonical_json(&file) {
            Ok(text) => emit(out_json, text),
            Err(err) => {
                set_last_error(err.to_string());
                TtcStatus::Internal
            }
        }
    })
}

/// Checks a candidate result document against the instance. Returns
/// `TTC_STATUS_OK` when the candidate is in the core; `TTC_STATUS_BLOCKED`
/// with a certificate document in `*out_json` otherwise. `max_coalition < 0`
/// means unbounded.
///
/// # Safety
/// `instance` must be a live handle; `candidate_json` a valid string;
/// `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ttc_verify(
    instance: *const TtcInstance,
    candidate_json: *const c_char,
    max_coalition: i64,
    out_json: *mut *mut c_char,
) -> TtcStatus {
    guarded(|| {
        if instance.is_null() || out_json.is_null() {
            return TtcStatus::NullArgument;
        }
        let text = match utf8_arg(candidate_json) {
            Ok(text) => text,
            Err(status) => return status,
        };
        clear_last_error();
        *out_json = std::ptr::null_mut();
        let candidate = match parse_result(text) {
            Ok(candidate) => candidate,
            Err(err) => {
                set_last_error(err.to_string());
                return TtcStatus::InvalidInput;
            }
        };
        let bound = if max_coalition < 0 { None } else { Some(max_coalition as usize) };
        let blocked = match &(*instance).inner {
            ParsedInstance::Network(inst) => {
                if candidate.kind != "network" {
                    set_last_error("candidate kind does not match the instance".to_string());
                    return TtcStatus::InvalidInput;
                }
                let net = match candidate.to_network() {
                    Ok(net) => net,
                    Err(err) => {
                        set_last_error(err.to_string());
                        return TtcStatus::InvalidInput;
                    }
                };
                match is_feasible_network(inst, &net) {
                    Ok(true) => {}
                    Ok(false) => {
                        set_last_error("candidate network exceeds a quota".to_string());
                        return TtcStatus::InvalidInput;
                    }
                    Err(err) => {
                        set_last_error(err.to_string());
                        return TtcStatus::InvalidInput;
                    }
                }
                find_blocking_coalition(inst, &net, bound, EmptyBundlePolicy::default())
                    .expect("validated inputs")
                    .map(|cert| {
                        let mut out = ResultFile::for_network(&net);
                        out.certificate = Some(network_certificate_section(&cert));
                        out
                    })
            }
            ParsedInstance::Cap(inst) => {
                if candidate.kind != "cap" {
                    set_last_error("candidate kind does not match the instance".to_string());
                    return TtcStatus::InvalidInput;
                }
                let alloc = match candidate.to_allocation() {
                    Ok(alloc) => alloc,
                    Err(err) => {
                        set_last_error(err.to_string());
                        return TtcStatus::InvalidInput;
                    }
                };
                match is_feasible_allocation(inst, &alloc) {
                    Ok(true) => {}
                    Ok(false) => {
                        set_last_error(
                            "candidate allocation is not exclusive with exact quotas".to_string(),
                        );
                        return TtcStatus::InvalidInput;
                    }
                    Err(err) => {
                        set_last_error(err.to_string());
                        return TtcStatus::InvalidInput;
                    }
                }
                cap_find_blocking(inst, &alloc, bound).expect("validated inputs").map(|cert| {
                    let mut out = ResultFile::for_allocation(&alloc);
                    out.certificate = Some(cap_certificate_section(&cert));
                    out
                })
            }
        };
        match blocked {
            None => TtcStatus::Ok,
            Some(result) => match to_canonical_json(&result) {
                Ok(text) => {
                    let status = emit(out_json, text);
                    if status == TtcStatus::Ok {
                        TtcStatus::Blocked
                    } else {
                        status
                    }
                }
                Err(err) => {
                    set_last_error(err.to_string());
                    TtcStatus::Internal
                }
            },
        }
    })
}

/// Solves a network instance, prices the outcome, verifies the price
/// properties, and writes the result document (with the prices section) to
/// `*out_json`. Returns `TTC_STATUS_PROPERTY_FAILED` when any check fails;
/// the document is still written.
///
/// # Safety
/// `instance` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ttc_prices(
    instance: *const TtcInstance,
    out_json: *mut *mut c_char,
) -> TtcStatus {
    guarded(|| {
        if instance.is_null() || out_json.is_null() {
            return TtcStatus::NullArgument;
        }
        clear_last_error();
        let inst = match &(*instance).inner {
            ParsedInstance::Network(inst) => inst,
            ParsedInstance::Cap(_) => {
                set_last_error("prices require a network instance".to_string());
                return TtcStatus::InvalidInput;
            }
        };
        let (net, trace) = solve_network(inst).expect("parsed instances are valid");
        let table = personalized_prices(&trace).expect("solver traces are well-formed");
        let report = verify_price_properties(inst, &net, &table)
            .expect("solver tables match their networks");
        let file = ResultFile::for_network(&net).with_stages(trace.stages).with_prices(&table);
        match to_canonical_json(&file) {
            Ok(text) => {
                let status = emit(out_json, text);
                if status == TtcStatus::Ok && !report.all_passed() {
                    TtcStatus::PropertyFailed
                } else {
                    status
                }
            }
            Err(err) => {
                set_last_error(err.to_string());
                TtcStatus::Internal
            }
        }
    })
}

/// Exhaustively enumerates the core of a network instance (balanced mode
/// when `balanced_only`, every feasible network otherwise) and writes a
/// document listing the members. Refuses with `TTC_STATUS_REFUSED` when the
/// raw candidate count exceeds `max_candidates`.
///
/// # Safety
/// `instance` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ttc_enumerate_core(
    instance: *const TtcInstance,
    balanced_only: bool,
    max_candidates: u64,
    out_json: *mut *mut c_char,
) -> TtcStatus {
    guarded(|| {
        if instance.is_null() || out_json.is_null() {
            return TtcStatus::NullArgument;
        }
        clear_last_error();
        let inst = match &(*instance).inner {
            ParsedInstance::Network(inst) => inst,
            ParsedInstance::Cap(_) => {
                set_last_error("enumeration requires a network instance".to_string());
                return TtcStatus::InvalidInput;
            }
        };
        let options = EnumerateOptions {
            mode: if balanced_only { FeasibilityMode::Balanced } else { FeasibilityMode::All },
            policy: EmptyBundlePolicy::default(),
            candidate_cap: max_candidates,
        };
        let mode = if balanced_only { "balanced" } else { "all" };
        match enumerate_core(inst, &options) {
            Ok(core) => {
                let doc = core_enumeration_file(mode, &core);
                match to_canonical_json(&doc) {
                    Ok(text) => emit(out_json, text),
                    Err(err) => {
                        set_last_error(err.to_string());
                        TtcStatus::Internal
                    }
                }
            }
            Err(err @ EnumerateError::TooLarge { .. })
            | Err(err @ EnumerateError::TooManyAgents { .. }) => {
                set_last_error(err.to_string());
                TtcStatus::Refused
            }
            Err(EnumerateError::Model(err)) => {
                set_last_error(err.to_string());
                TtcStatus::InvalidInput
            }
        }
    })
}
