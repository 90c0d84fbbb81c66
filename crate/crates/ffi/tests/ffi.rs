use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use contact_triple_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = ct_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const MOEBIUS: &str = r#"{"bundle": {"kind": "moebius"}, "side": "lagrangian", "lagrangian": {"builtin": "moebius-hyperregular"}}"#;

#[test]
fn section_round_trip() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ct_section_from_json(c(MOEBIUS).as_ptr(), &mut s) }, CtStatus::Ok);
    assert_eq!(unsafe { ct_section_dim(s) }, 1);
    let mut side = CtSide::Hamiltonian;
    assert_eq!(unsafe { ct_section_side(s, &mut side) }, CtStatus::Ok);
    assert_eq!(side, CtSide::Lagrangian);
    let args = [0.0, 1.3, 0.7];
    let (mut value, mut grad) = (0.0, [0.0; 3]);
    assert_eq!(unsafe { ct_section_eval(s, 0, args.as_ptr(), 3, &mut value, grad.as_mut_ptr()) }, CtStatus::Ok);
    assert!((value - (1.3f64 * 1.3 - 0.49) / 2.0).abs() < 1e-15);
    assert_eq!((grad[1], grad[2]), (1.3, -0.7));
    // wrong argument count
    assert_eq!(
        unsafe { ct_section_eval(s, 0, args.as_ptr(), 2, &mut value, ptr::null_mut()) },
        CtStatus::InvalidArgument
    );
    assert!(last_error().contains("dimension"));
    // chart 1 does not contain x = 0
    assert_eq!(unsafe { ct_section_eval(s, 7, args.as_ptr(), 3, &mut value, ptr::null_mut()) }, CtStatus::Chart);
    unsafe { ct_section_free(s) };
}

#[test]
fn errors_are_codes_not_panics() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ct_section_from_json(ptr::null(), &mut s) }, CtStatus::NullPointer);
    let bad = c(r#"{"bundle": {"kind": "trivial", "dim": 1}, "side": "hamiltonian", "hamiltonian": {"expr": "p1^"}}"#);
    assert_eq!(unsafe { ct_section_from_json(bad.as_ptr(), &mut s) }, CtStatus::Config);
    assert!(last_error().contains("hamiltonian.expr"));
    assert!(s.is_null());
    unsafe { ct_section_free(ptr::null_mut()) };
    assert_eq!(unsafe { ct_section_dim(ptr::null()) }, 0);
}

#[test]
fn trajectory_access() {
    let cfg = c(r#"{
        "bundle": {"kind": "moebius"}, "side": "lagrangian", "lagrangian": {"builtin": "moebius-hyperregular"},
        "integrator": {"method": "rk4", "step": 0.01}, "duration": 3
    }"#);
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ct_scenario_run(cfg.as_ptr(), &mut t) }, CtStatus::Ok);
    let n = unsafe { ct_trajectory_len(t) };
    assert_eq!(n, 301);
    let (mut s, mut chart, mut state) = (0.0, 0usize, [0.0; 3]);
    assert_eq!(unsafe { ct_trajectory_sample(t, n - 1, &mut s, &mut chart, state.as_mut_ptr()) }, CtStatus::Ok);
    assert_eq!((s, chart), (3.0, 1));
    assert_eq!(unsafe { ct_trajectory_event_count(t) }, 1);
    let (mut es, mut from, mut to) = (0.0, 9usize, 9usize);
    assert_eq!(unsafe { ct_trajectory_event(t, 0, &mut es, &mut from, &mut to) }, CtStatus::Ok);
    assert_eq!((from, to), (0, 1));
    let dir = tempfile_dir();
    let path = c(dir.join("m.csv").to_str().unwrap());
    assert_eq!(unsafe { ct_trajectory_write(t, path.as_ptr(), CtFormat::Csv as u32) }, CtStatus::Ok);
    assert!(dir.join("m.events.csv").exists());
    assert_eq!(unsafe { ct_trajectory_write(t, path.as_ptr(), 9) }, CtStatus::InvalidArgument);
    unsafe { ct_trajectory_free(t) };
}

#[test]
fn numerical_failures_have_their_own_codes() {
    let cfg = c(r#"{"bundle": {"kind": "trivial", "dim": 1}, "side": "lagrangian",
        "lagrangian": {"expr": "xd1^2/2"}, "initial": {"x": [0], "xd": [1], "t": 0}, "duration": 1}"#);
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ct_scenario_run(cfg.as_ptr(), &mut t) }, CtStatus::Singular);
    assert!(t.is_null());
}

#[test]
fn verify_suite() {
    assert_eq!(unsafe { ct_verify(c("moebius").as_ptr()) }, CtStatus::Ok);
    assert_eq!(unsafe { ct_verify(c("bogus").as_ptr()) }, CtStatus::Config);
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ct-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Compiles the C smoke program against the generated header and the static
/// library, then runs it.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<this test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libcontact_triple_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let out = tempfile_dir().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
