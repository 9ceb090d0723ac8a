use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use opuc_ffi::*;

fn new_seq(re: &[f64], im: &[f64]) -> Result<*mut OpucSequence, (OpucStatus, String)> {
    let mut out = ptr::null_mut();
    let status = unsafe { opuc_sequence_new(re.as_ptr(), im.as_ptr(), re.len(), 1e-8, &mut out) };
    if status == OpucStatus::Ok {
        Ok(out)
    } else {
        Err((status, last_error()))
    }
}

fn last_error() -> String {
    let need = unsafe { opuc_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; need];
    unsafe { opuc_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn sequence_lifecycle() {
    let s = new_seq(&[2.0, 0.5], &[0.0, 0.0]).unwrap();
    unsafe {
        assert_eq!(opuc_sequence_len(s), 2);
        assert_eq!(opuc_sequence_classical_start(s), 1);
        opuc_sequence_free(s);
        opuc_sequence_free(ptr::null_mut());
        assert_eq!(opuc_sequence_len(ptr::null()), 0);
    }
    let empty = unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(opuc_sequence_new(ptr::null(), ptr::null(), 0, 1e-8, &mut out), OpucStatus::Ok);
        out
    };
    unsafe {
        assert_eq!(opuc_sequence_len(empty), 0);
        opuc_sequence_free(empty);
    }
}

#[test]
fn invalid_sequence_reports_index() {
    let (status, msg) = new_seq(&[0.3, 0.0], &[0.0, 1.0]).unwrap_err();
    assert_eq!(status, OpucStatus::InvalidSequence);
    assert!(msg.contains("index 1 on unit circle"), "{msg}");
    let mut out = ptr::null_mut();
    let status = unsafe { opuc_sequence_new(ptr::null(), ptr::null(), 2, 1e-8, &mut out) };
    assert_eq!(status, OpucStatus::NullPointer);
    assert!(out.is_null());
}

#[test]
fn szego_summary() {
    let s = new_seq(&[2.0], &[0.0]).unwrap();
    let mut r = OpucSzegoSummary::default();
    assert_eq!(unsafe { opuc_szego_verify(s, 0.0, 0, &mut r) }, OpucStatus::Ok);
    assert_eq!(r.lhs, -3.0);
    assert!((r.rhs + 3.0).abs() < 1e-10 && r.rel_error < 1e-10);
    assert_eq!((r.epsilon, r.pole_count, r.classical_start), (-1.0, 1, 1));
    assert!(last_error().is_empty());
    assert_eq!(unsafe { opuc_szego_verify(ptr::null(), 0.0, 0, &mut r) }, OpucStatus::NullPointer);
    assert_eq!(unsafe { opuc_szego_verify(s, 0.0, 0, ptr::null_mut()) }, OpucStatus::NullPointer);
    unsafe { opuc_sequence_free(s) };
}

#[test]
fn poles_sizing_and_copy() {
    let s = new_seq(&[2.0, 0.5], &[0.0, 0.0]).unwrap();
    let mut count = 0usize;
    let status = unsafe { opuc_poles(s, ptr::null_mut(), ptr::null_mut(), 0, &mut count) };
    assert_eq!((status, count), (OpucStatus::BufferTooSmall, 1));
    let (mut re, mut im) = (vec![0.0; count], vec![0.0; count]);
    let status = unsafe { opuc_poles(s, re.as_mut_ptr(), im.as_mut_ptr(), count, &mut count) };
    assert_eq!(status, OpucStatus::Ok);
    assert!((re[0] - (3f64.sqrt() - 1.0)).abs() < 1e-12 && im[0].abs() < 1e-12);
    unsafe { opuc_sequence_free(s) };
}

#[test]
fn caratheodory_and_khrushchev() {
    let s = new_seq(&[2.0], &[0.0]).unwrap();
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { opuc_eval_caratheodory(s, 0.0, 1.0, &mut re, &mut im) }, OpucStatus::Ok);
    assert!((re + 0.6).abs() < 1e-15 && (im - 0.8).abs() < 1e-15);
    let mut v = 0.0;
    assert_eq!(unsafe { opuc_re_f_khrushchev(s, 1, std::f64::consts::FRAC_PI_2, &mut v) }, OpucStatus::Ok);
    assert!((v + 0.6).abs() < 1e-15);
    assert_eq!(unsafe { opuc_re_f_khrushchev(s, 0, 0.0, &mut v) }, OpucStatus::InvalidArgument);
    assert!(last_error().contains("below the classical start"));
    assert_eq!(unsafe { opuc_eval_caratheodory(s, 0.5, 0.0, &mut re, &mut im) }, OpucStatus::Numeric);
    unsafe { opuc_sequence_free(s) };
}

#[test]
fn moments_buffer() {
    let s = new_seq(&[2.0], &[0.0]).unwrap();
    let (mut re, mut im) = (vec![0.0; 5], vec![0.0; 5]);
    let (mut g, mut p) = (0.0, 0.0);
    let status = unsafe { opuc_moments(s, 1, 5, re.as_mut_ptr(), im.as_mut_ptr(), &mut g, &mut p) };
    assert_eq!(status, OpucStatus::Ok);
    assert_eq!(re, vec![2.0, 4.0, 8.0, 16.0, 32.0]);
    assert!(im.iter().all(|&x| x == 0.0));
    assert!((g - 2.0).abs() < 1e-12 && (p - 2.0).abs() < 1e-12);
    unsafe { opuc_sequence_free(s) };
}

fn recover(num: &[f64], den: &[f64], max_n: usize) -> (OpucStatus, Vec<f64>, OpucTermination) {
    let zeros = vec![0.0; num.len().max(den.len())];
    let (mut re, mut im) = (vec![f64::NAN; max_n], vec![f64::NAN; max_n]);
    let mut count = 0;
    let mut term = OpucTermination::None;
    let status = unsafe {
        opuc_recover(
            num.as_ptr(), zeros.as_ptr(), num.len(),
            den.as_ptr(), zeros.as_ptr(), den.len(),
            max_n, 1e-8,
            re.as_mut_ptr(), im.as_mut_ptr(), max_n,
            &mut count, &mut term,
        )
    };
    re.truncate(count);
    (status, re, term)
}

#[test]
fn recover_coefficients() {
    assert_eq!(recover(&[1.0, 2.0], &[1.0, -2.0], 4), (OpucStatus::Ok, vec![2.0, 0.0, 0.0, 0.0], OpucTermination::None));
    assert_eq!(recover(&[1.0, 1.0], &[1.0, -1.0], 3), (OpucStatus::Ok, vec![1.0], OpucTermination::UnitModulus));
    assert_eq!(recover(&[1.0], &[0.0, 1.0], 3), (OpucStatus::Ok, vec![], OpucTermination::PoleAtZero));
    assert_eq!(recover(&[0.0, 1.0], &[1.0], 3).0, OpucStatus::InvalidArgument);
}

#[test]
fn errors_are_thread_local() {
    let _ = new_seq(&[1.0], &[0.0]).unwrap_err();
    let other = std::thread::spawn(last_error).join().unwrap();
    assert!(other.is_empty());
    assert!(last_error().contains("unit circle"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/opuc.h")
}

#[test]
fn header_declares_public_surface() {
    let text = std::fs::read_to_string(header()).unwrap();
    for sym in [
        "typedef struct OpucSequence OpucSequence;",
        "OPUC_STATUS_OK = 0",
        "OPUC_STATUS_BUFFER_TOO_SMALL",
        "OPUC_TERMINATION_POLE_AT_ZERO",
        "typedef struct OpucSzegoSummary",
        "opuc_sequence_new(",
        "opuc_sequence_free(",
        "opuc_sequence_len(",
        "opuc_sequence_classical_start(",
        "opuc_szego_verify(",
        "opuc_poles(",
        "opuc_eval_caratheodory(",
        "opuc_re_f_khrushchev(",
        "opuc_moments(",
        "opuc_recover(",
        "opuc_last_error_message(",
    ] {
        assert!(text.contains(sym), "missing {sym}");
    }
}

const C_PROGRAM: &str = r#"
#include "opuc.h"
#include <stdio.h>
int main(void) {
    double re[1] = {2.0}, im[1] = {0.0};
    OpucSequence *s = NULL;
    if (opuc_sequence_new(re, im, 1, 1e-8, &s) != OPUC_STATUS_OK) return 1;
    OpucSzegoSummary r;
    if (opuc_szego_verify(s, 0.0, 0, &r) != OPUC_STATUS_OK) return 2;
    printf("%.6f %zu\n", r.lhs, r.pole_count);
    double bad[1] = {1.0};
    OpucSequence *t = NULL;
    if (opuc_sequence_new(bad, im, 1, 1e-8, &t) != OPUC_STATUS_INVALID_SEQUENCE) return 3;
    char msg[128];
    opuc_last_error_message(msg, sizeof msg);
    printf("%s\n", msg);
    opuc_sequence_free(s);
    return 0;
}
"#;

/// The header compiles as C99; when the static library sits next to the
/// test binary's profile directory, the program is also linked and run.
#[test]
fn header_compiles_and_links_from_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = tempfile_dir();
    let src = dir.join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = header().parent().unwrap().to_path_buf();
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success(), "header does not compile");

    let profile = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile.join("libopuc_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping link step", lib.display());
        return;
    }
    let exe = dir.join("main");
    let status = Command::new(&cc)
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "link failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("-3.000000 1\n"), "{text}");
    assert!(text.contains("index 0 on unit circle"), "{text}");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("opuc-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
