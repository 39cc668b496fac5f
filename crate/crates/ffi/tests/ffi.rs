use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use tcs_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { tcs_string_free(p) };
    s
}

fn last_error() -> String {
    let p = tcs_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn speeds() {
    let mut v = 0u64;
    unsafe {
        assert_eq!(tcs_constant_speed(c("807").as_ptr(), &mut v), TcsStatus::Ok);
        assert_eq!(v, 3);
        assert_eq!(tcs_speed_at_height(c("807").as_ptr(), 3, 64, &mut v), TcsStatus::Ok);
        assert_eq!(v, 4);
        assert_eq!(tcs_speed_by_formula(c("163574218751").as_ptr(), &mut v), TcsStatus::Ok);
        assert_eq!(v, 13);
    }
}

#[test]
fn strings() {
    let mut out: *mut c_char = ptr::null_mut();
    unsafe {
        assert_eq!(tcs_min_base(19, &mut out), TcsStatus::Ok);
        assert_eq!(take_string(out), "1572865");
        assert_eq!(tcs_min_base_class(2, 4, &mut out), TcsStatus::Ok);
        assert_eq!(take_string(out), "182");
        assert_eq!(tcs_root_residue(6, 6, &mut out), TcsStatus::Ok);
        assert_eq!(take_string(out), "890625");
        assert_eq!(tcs_smallest_prime_with_speed(6, 1000, &mut out), TcsStatus::Ok);
        assert_eq!(take_string(out), "2218751");
        tcs_string_free(ptr::null_mut());
    }
}

#[test]
fn primality() {
    let mut p = false;
    unsafe {
        assert_eq!(tcs_is_prime(c("29509900499").as_ptr(), &mut p), TcsStatus::Ok);
        assert!(p);
        assert_eq!(tcs_is_prime(c("1").as_ptr(), &mut p), TcsStatus::Ok);
        assert!(!p);
    }
}

#[test]
fn errors_carry_messages() {
    let mut v = 0u64;
    let mut out: *mut c_char = ptr::null_mut();
    unsafe {
        assert_eq!(tcs_constant_speed(c("100").as_ptr(), &mut v), TcsStatus::InvalidArgument);
        assert!(last_error().contains("multiple of 10"), "{}", last_error());
        assert_eq!(tcs_constant_speed(c("12x").as_ptr(), &mut v), TcsStatus::InvalidArgument);
        assert_eq!(tcs_constant_speed(ptr::null(), &mut v), TcsStatus::NullPointer);
        assert_eq!(tcs_constant_speed(c("7").as_ptr(), ptr::null_mut()), TcsStatus::NullPointer);
        assert_eq!(tcs_root_residue(14, 3, &mut out), TcsStatus::OutOfRange);
        assert_eq!(tcs_speed_at_height(c("98305").as_ptr(), 8, 16, &mut v), TcsStatus::PrecisionExhausted);
        assert_eq!(tcs_smallest_prime_with_speed(6, 2, &mut out), TcsStatus::BudgetExhausted);
        assert!(last_error().contains("resume"));
        assert_eq!(tcs_min_base_class(2, 1, &mut out), TcsStatus::InvalidArgument);
        assert_eq!(tcs_min_base(4, &mut out), TcsStatus::Ok);
        assert!(tcs_last_error().is_null());
        tcs_string_free(out);
    }
}

#[test]
fn profile_handle() {
    let mut p: *mut TcsProfile = ptr::null_mut();
    let mut v = 0u64;
    unsafe {
        assert_eq!(tcs_profile_new(c("807").as_ptr(), 8, 64, &mut p), TcsStatus::Ok);
        assert_eq!(tcs_profile_len(p), 8);
        let speeds: Vec<u64> = (1..=8)
            .map(|b| {
                assert_eq!(tcs_profile_speed(p, b, &mut v), TcsStatus::Ok);
                v
            })
            .collect();
        assert_eq!(speeds, [0, 4, 4, 4, 4, 3, 3, 3]);
        assert_eq!(tcs_profile_frozen(p, 2, &mut v), TcsStatus::Ok);
        assert_eq!(v, 4);
        assert_eq!(tcs_profile_constant_speed(p, &mut v), TcsStatus::Ok);
        assert_eq!(v, 3);
        assert_eq!(tcs_profile_speed(p, 0, &mut v), TcsStatus::OutOfRange);
        assert_eq!(tcs_profile_speed(p, 9, &mut v), TcsStatus::OutOfRange);
        tcs_profile_free(p);

        assert_eq!(tcs_profile_new(c("807").as_ptr(), 4, 64, &mut p), TcsStatus::Ok);
        assert_eq!(tcs_profile_constant_speed(p, &mut v), TcsStatus::PrecisionExhausted);
        tcs_profile_free(p);

        assert_eq!(tcs_profile_len(ptr::null()), 0);
        assert_eq!(tcs_profile_speed(ptr::null(), 1, &mut v), TcsStatus::NullPointer);
        tcs_profile_free(ptr::null_mut());
    }
}

#[test]
fn version() {
    assert_eq!(tcs_ffi_version(), 100);
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/tcs.h")
}

#[test]
fn header_compiles_as_c_and_cpp() {
    for (compiler, lang) in [("gcc", "c"), ("g++", "c++")] {
        let status = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(header())
            .status()
            .unwrap_or_else(|e| panic!("{compiler} not runnable: {e}"));
        assert!(status.success(), "{compiler} rejected the header");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "tcs.h"

int main(void) {
    uint64_t v = 0;
    if (tcs_constant_speed("807", &v) != TCS_STATUS_OK || v != 3) return 1;
    char *s = NULL;
    if (tcs_root_residue(9, 3, &s) != TCS_STATUS_OK || strcmp(s, "807") != 0) return 2;
    tcs_string_free(s);
    if (tcs_constant_speed("10", &v) != TCS_STATUS_INVALID_ARGUMENT) return 3;
    if (tcs_last_error() == NULL) return 4;
    TcsProfile *p = NULL;
    if (tcs_profile_new("143", 6, 64, &p) != TCS_STATUS_OK || tcs_profile_len(p) != 6) return 5;
    tcs_profile_free(p);
    puts("ok");
    return 0;
}
"#;

#[test]
fn c_program_links_against_static_library() {
    // test binary lives in target/<profile>/deps; the static library one level up
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libtcs_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = header().parent().unwrap().to_owned();
    let status = Command::new("gcc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "link failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke program exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}
