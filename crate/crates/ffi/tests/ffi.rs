use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use serde_json::{json, Value};
use symcoord_ffi::*;

fn last_error() -> String {
    let p = symcoord_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn take_string(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { symcoord_string_free(p) };
    s
}

fn tuple_json(t: *const SymcoordTuple) -> Value {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { symcoord_tuple_to_json(t, &mut s) }, SymcoordStatus::Ok);
    serde_json::from_str(&take_string(s)).unwrap()
}

fn sample(mode: u32, m: usize, n: usize, seed: u64) -> *mut SymcoordTuple {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { symcoord_tuple_sample(mode, m, n, seed, &mut t) }, SymcoordStatus::Ok);
    t
}

#[test]
fn sample_is_deterministic_and_reparses() {
    let a = sample(SYMCOORD_MODE_EXACT, 3, 4, 5);
    let b = sample(SYMCOORD_MODE_EXACT, 3, 4, 5);
    let doc = tuple_json(a);
    assert_eq!(doc, tuple_json(b));
    let text = CString::new(doc.to_string()).unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { symcoord_tuple_from_json(text.as_ptr(), 0.0, &mut c) }, SymcoordStatus::Ok);
    assert_eq!(tuple_json(c), doc);
    unsafe {
        symcoord_tuple_free(a);
        symcoord_tuple_free(b);
        symcoord_tuple_free(c);
    }
}

#[test]
fn reduce_lift_reduce_is_stable() {
    for mode in [SYMCOORD_MODE_EXACT, SYMCOORD_MODE_FLOAT] {
        let t = sample(mode, 3, 5, 17);
        let mut p = ptr::null_mut();
        assert_eq!(unsafe { symcoord_reduce(t, ptr::null(), &mut p) }, SymcoordStatus::Ok);
        let mut l = ptr::null_mut();
        assert_eq!(unsafe { symcoord_lift(p, &mut l) }, SymcoordStatus::Ok);
        let mut q = ptr::null_mut();
        assert_eq!(unsafe { symcoord_reduce(l, ptr::null(), &mut q) }, SymcoordStatus::Ok);
        let (mut sp, mut sq) = (ptr::null_mut(), ptr::null_mut());
        unsafe {
            assert_eq!(symcoord_reduced_to_json(p, &mut sp), SymcoordStatus::Ok);
            assert_eq!(symcoord_reduced_to_json(q, &mut sq), SymcoordStatus::Ok);
        }
        let (jp, jq) = (take_string(sp), take_string(sq));
        if mode == SYMCOORD_MODE_EXACT {
            assert_eq!(jp, jq);
        }
        let text = CString::new(jp).unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(unsafe { symcoord_reduced_from_json(text.as_ptr(), 0.0, &mut r) }, SymcoordStatus::Ok);
        unsafe {
            symcoord_tuple_free(t);
            symcoord_tuple_free(l);
            symcoord_reduced_free(p);
            symcoord_reduced_free(q);
            symcoord_reduced_free(r);
        }
    }
}

#[test]
fn verify_reports_exact_zero() {
    let t = sample(SYMCOORD_MODE_EXACT, 2, 4, 3);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { symcoord_verify_pullback(t, ptr::null(), 10, 1, &mut report) }, SymcoordStatus::Ok);
    let doc: Value = serde_json::from_str(&take_string(report)).unwrap();
    assert_eq!(doc["max_residual_a"], json!("exact-zero"));
    assert_eq!(doc["passed"], json!(true));
    unsafe { symcoord_tuple_free(t) };
}

#[test]
fn error_codes() {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { symcoord_tuple_from_json(ptr::null(), 0.0, &mut t) }, SymcoordStatus::NullArgument);
    let bad = CString::new("{oops").unwrap();
    assert_eq!(unsafe { symcoord_tuple_from_json(bad.as_ptr(), 0.0, &mut t) }, SymcoordStatus::Parse);
    assert!(t.is_null());

    let repeated = CString::new(
        json!({"specs": [{"m": 2, "eigs": [[1, 1], [1, 1]]}, {"m": 2, "eigs": [[0, 2]]}, {"m": 2, "eigs": [[-2, 2]]}],
               "matrices": [[[1, 0], [0, 1]], [[0, 1], [0, 0]], [[-1, -1], [0, -1]]]})
        .to_string(),
    )
    .unwrap();
    assert_eq!(unsafe { symcoord_tuple_from_json(repeated.as_ptr(), 0.0, &mut t) }, SymcoordStatus::Rejected);
    assert!(last_error().contains("one-dimensional"));

    assert_eq!(unsafe { symcoord_tuple_sample(7, 2, 3, 0, &mut t) }, SymcoordStatus::Parse);
    assert_eq!(unsafe { symcoord_tuple_sample(SYMCOORD_MODE_EXACT, 1, 3, 0, &mut t) }, SymcoordStatus::Rejected);

    let zero_component = CString::new(
        json!({"specs": [{"m": 2, "eigs": [[3, 1], [4, 1]]}, {"m": 2, "eigs": [[1, 1], [2, 1]]}, {"m": 2, "eigs": [[-4, 1], [-6, 1]]}],
               "matrices": [[[3, 0], [1, 4]], [[1, 0], [0, 2]], [[-4, 0], [-1, -6]]]})
        .to_string(),
    )
    .unwrap();
    assert_eq!(unsafe { symcoord_tuple_from_json(zero_component.as_ptr(), 0.0, &mut t) }, SymcoordStatus::Ok);
    let data = CString::new(json!({"lambda": -6, "ordering_up": [1, 2], "ordering_low": [3, 4]}).to_string()).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { symcoord_reduce(t, data.as_ptr(), &mut p) }, SymcoordStatus::OutsideDomain);
    assert!(last_error().contains("row-sum"));
    assert!(p.is_null());
    unsafe { symcoord_tuple_free(t) };

    let momentum = CString::new(
        json!({"specs": [{"m": 2, "eigs": [[1, 1], [2, 1]]}, {"m": 2, "eigs": [[1, 1], [2, 1]]}, {"m": 2, "eigs": [[-1, 1], [-5, 1]]}],
               "matrices": [[[1, 0], [0, 2]], [[1, 0], [0, 2]], [[-1, 0], [0, -5]]]})
        .to_string(),
    )
    .unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { symcoord_tuple_from_json(momentum.as_ptr(), 0.0, &mut t) }, SymcoordStatus::Verification);
}

#[test]
fn freeing_null_is_harmless() {
    unsafe {
        symcoord_tuple_free(ptr::null_mut());
        symcoord_reduced_free(ptr::null_mut());
        symcoord_string_free(ptr::null_mut());
    }
    assert_eq!(symcoord_reduced_dimension(2, 3), 0);
    assert_eq!(symcoord_reduced_dimension(3, 4), 8);
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    let header = std::fs::read_to_string(header_dir.join("symcoord.h")).unwrap();
    for name in ["symcoord_tuple_sample", "symcoord_reduce", "symcoord_last_error", "SymcoordStatus"] {
        assert!(header.contains(name), "header lacks {name}");
    }
    // target/<profile>/deps/<test binary> -> target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libsymcoord_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "symcoord.h"
int main(void) {
    SymcoordTuple *t = NULL;
    SymcoordReduced *p = NULL;
    char *report = NULL;
    if (symcoord_tuple_sample(SYMCOORD_MODE_EXACT, 3, 4, 42, &t) != SYMCOORD_STATUS_OK) return 1;
    if (symcoord_reduce(t, NULL, &p) != SYMCOORD_STATUS_OK) return 2;
    if (symcoord_verify_pullback(t, NULL, 3, 7, &report) != SYMCOORD_STATUS_OK) return 3;
    printf("%s\n", report);
    symcoord_string_free(report);
    symcoord_reduced_free(p);
    symcoord_tuple_free(t);
    if (symcoord_tuple_sample(9, 3, 4, 42, &t) != SYMCOORD_STATUS_PARSE) return 4;
    if (symcoord_last_error() == NULL) return 5;
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C smoke test exited with {:?}", out.status.code());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], json!(true));
}
