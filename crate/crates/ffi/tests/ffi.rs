//! Exercises the C ABI from Rust (through the same extern functions a C
//! caller would use) and, when a C compiler is available, compiles and runs
//! a small C program against the generated header and static library.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::PathBuf;
use std::ptr;

use ttcnet_ffi::*;

const EX3: &str = r#"{"kind":"network","agents":2,"quotas":[1,2],"preferences":[[0,1],[0,1]]}"#;

fn parse(json: &str) -> *mut TtcInstance {
    let json = CString::new(json).unwrap();
    let mut handle: *mut TtcInstance = ptr::null_mut();
    let status = unsafe { ttc_instance_parse(json.as_ptr(), &mut handle) };
    assert_eq!(status, TtcStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn take_string(ptr: *mut c_char) -> String {
    assert!(!ptr.is_null());
    let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
    unsafe { ttc_string_free(ptr) };
    text
}

#[test]
fn parse_solve_and_free() {
    let handle = parse(EX3);
    assert_eq!(unsafe { ttc_agent_count(handle) }, 2);
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { ttc_solve(handle, false, &mut out) };
    assert_eq!(status, TtcStatus::Ok);
    let text = take_string(out);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["assignments"], serde_json::json!([[0], [1]]));
    assert_eq!(doc["stages"], serde_json::json!(2));
    unsafe { ttc_instance_free(handle) };
}

#[test]
fn parse_rejects_bad_input_with_diagnostic() {
    let json = CString::new(
        r#"{"kind":"network","agents":2,"quotas":[1,2],"preferences":[[0,0],[0,1]]}"#,
    )
    .unwrap();
    let mut handle: *mut TtcInstance = ptr::null_mut();
    let status = unsafe { ttc_instance_parse(json.as_ptr(), &mut handle) };
    assert_eq!(status, TtcStatus::InvalidInput);
    assert!(handle.is_null());
    let message = take_string(ttc_last_error_message());
    assert!(message.contains("agent 0"), "{message}");
}

#[test]
fn null_arguments_are_reported() {
    let mut handle: *mut TtcInstance = ptr::null_mut();
    assert_eq!(
        unsafe { ttc_instance_parse(ptr::null(), &mut handle) },
        TtcStatus::NullArgument
    );
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { ttc_solve(ptr::null(), false, &mut out) }, TtcStatus::NullArgument);
}

#[test]
fn verify_distinguishes_core_and_blocked() {
    let handle = parse(EX3);
    let core = CString::new(r#"{"kind":"network","assignments":[[0],[1]]}"#).unwrap();
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { ttc_verify(handle, core.as_ptr(), -1, &mut out) }, TtcStatus::Ok);
    assert!(out.is_null());

    let blocked = CString::new(r#"{"kind":"network","assignments":[[1],[0,1]]}"#).unwrap();
    let status = unsafe { ttc_verify(handle, blocked.as_ptr(), -1, &mut out) };
    assert_eq!(status, TtcStatus::Blocked);
    let text = take_string(out);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["certificate"]["coalition"], serde_json::json!([0]));
    unsafe { ttc_instance_free(handle) };
}

#[test]
fn prices_and_enumeration_round_trip() {
    let handle = parse(EX3);
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { ttc_prices(handle, &mut out) }, TtcStatus::Ok);
    let doc: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(doc["prices"]["stage_prices"], serde_json::json!(["2", "1"]));

    let mut core_out: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { ttc_enumerate_core(handle, true, 10_000_000, &mut core_out) },
        TtcStatus::Ok
    );
    let doc: serde_json::Value = serde_json::from_str(&take_string(core_out)).unwrap();
    assert_eq!(doc["count"], serde_json::json!(1));
    unsafe { ttc_instance_free(handle) };
}

#[test]
fn enumeration_refusal_reports_the_size() {
    let big = {
        let n = 12usize;
        let prefs: Vec<Vec<usize>> = (0..n).map(|_| (0..n).collect()).collect();
        format!(
            r#"{{"kind":"network","agents":{n},"quotas":{:?},"preferences":{:?}}}"#,
            vec![n; n],
            prefs
        )
    };
    let handle = parse(&big);
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { ttc_enumerate_core(handle, true, 10_000_000, &mut out) },
        TtcStatus::Refused
    );
    let message = take_string(ttc_last_error_message());
    assert!(message.contains("too large"), "{message}");
    unsafe { ttc_instance_free(handle) };
}

#[test]
fn header_lists_every_exported_function() {
    let header = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/ttcnet.h"),
    )
    .expect("header is generated at build time");
    for symbol in [
        "ttc_instance_parse",
        "ttc_instance_free",
        "ttc_agent_count",
        "ttc_solve",
        "ttc_verify",
        "ttc_prices",
        "ttc_enumerate_core",
        "ttc_string_free",
        "ttc_last_error_message",
        "ttc_version",
        "TTC_STATUS_BLOCKED",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}

/// Compiles and runs a tiny C client against the header and static library.
/// Skips silently when no C compiler is on the path.
#[test]
fn c_client_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    let lib_dir = manifest.join("../../target").join(if cfg!(debug_assertions) {
        "debug"
    } else {
        "release"
    });
    let staticlib = lib_dir.join("libttcnet_ffi.a");
    if !staticlib.exists() {
        eprintln!("skipping: {} not built", staticlib.display());
        return;
    }
    let compiler = ["cc", "gcc", "clang"].iter().find(|c| {
        std::process::Command::new(c)
            .arg("--version")
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false)
    });
    let Some(compiler) = compiler else {
        eprintln!("skipping: no C compiler found");
        return;
    };

    let dir = tempfile::TempDir::new().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include "ttcnet.h"
#include <stdio.h>
#include <string.h>

int main(void) {
    const char *instance =
        "{\"kind\":\"network\",\"agents\":2,\"quotas\":[1,2],"
        "\"preferences\":[[0,1],[0,1]]}";
    TtcInstance *handle = NULL;
    if (ttc_instance_parse(instance, &handle) != TTC_STATUS_OK) return 1;
    if (ttc_agent_count(handle) != 2) return 2;

    char *solved = NULL;
    if (ttc_solve(handle, false, &solved) != TTC_STATUS_OK) return 3;
    if (strstr(solved, "\"assignments\"") == NULL) return 4;
    ttc_string_free(solved);

    const char *blocked = "{\"kind\":\"network\",\"assignments\":[[1],[0,1]]}";
    char *certificate = NULL;
    if (ttc_verify(handle, blocked, -1, &certificate) != TTC_STATUS_BLOCKED) return 5;
    if (strstr(certificate, "\"coalition\"") == NULL) return 6;
    ttc_string_free(certificate);

    ttc_instance_free(handle);
    printf("ok\n");
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let compile = std::process::Command::new(compiler)
        .arg(&src)
        .arg(&staticlib)
        .arg(format!("-I{}", include.display()))
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        compile.status.success(),
        "C compilation failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = std::process::Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "smoke client exited {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
