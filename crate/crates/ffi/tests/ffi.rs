use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use qdg_ffi::*;

fn g1() -> ([f64; 4], [f64; 4]) {
    ([1., 0., 0., -2.], [0., -1., 1., 0.])
}

fn last_error() -> String {
    let mut buf = vec![0i8; 512];
    let n = unsafe { qdg_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr().cast()) }.to_string_lossy().into_owned()
}

#[test]
fn vacuous_prevision_is_eigen_range() {
    let (re, im) = g1();
    let set = qdg_credal_vacuous(2);
    let (mut lo, mut up) = (0.0, 0.0);
    let st = unsafe { qdg_prevision(set, re.as_ptr(), im.as_ptr(), &mut lo, &mut up) };
    assert_eq!(st, QdgStatus::Ok);
    let r = 13f64.sqrt() / 2.0;
    assert!((lo - (-0.5 - r)).abs() < 1e-6 && (up - (-0.5 + r)).abs() < 1e-6);
    assert_eq!(unsafe { qdg_credal_dim(set) }, 2);
    unsafe { qdg_credal_free(set) };
}

#[test]
fn incoherent_certificate() {
    let re = [1., 0., 0., -2., -2., 0., 0., 1.];
    let im = [0., -1., 1., 0., 0., 1., -1., 0.];
    let strict = [1u8, 1];
    let (mut c, mut m, mut alpha, mut beta) = (-1, 0.0, [0.0; 2], 0.0);
    let st = unsafe {
        qdg_check_coherence(2, 2, re.as_ptr(), im.as_ptr(), strict.as_ptr(), &mut c, &mut m, alpha.as_mut_ptr(), &mut beta)
    };
    assert_eq!(st, QdgStatus::Ok);
    assert_eq!(c, 0);
    assert!(beta >= 1.0 - 1e-8);
    assert!((alpha[0] - alpha[1]).abs() < 1e-6);
    let mut out = ptr::null_mut();
    let st = unsafe { qdg_credal_from_assessments(2, 2, re.as_ptr(), im.as_ptr(), strict.as_ptr(), &mut out) };
    assert_eq!(st, QdgStatus::Incoherent);
    assert!(out.is_null());
}

#[test]
fn errors_and_null_pointers() {
    let bad = [1., 2., 0., 1.];
    let mut out = ptr::null_mut();
    let st = unsafe { qdg_credal_from_extreme_points(2, 1, bad.as_ptr(), ptr::null(), &mut out) };
    assert_eq!(st, QdgStatus::NotHermitian);
    assert!(last_error().contains("tol_herm"));
    let (mut lo, mut up) = (0.0, 0.0);
    let st = unsafe { qdg_prevision(ptr::null(), bad.as_ptr(), ptr::null(), &mut lo, &mut up) };
    assert_eq!(st, QdgStatus::NullPointer);
    unsafe { qdg_credal_free(ptr::null_mut()) };
}

#[test]
fn condition_and_extend() {
    let half = [0.5, 0., 0., 0.5];
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(qdg_credal_from_extreme_points(2, 1, half.as_ptr(), ptr::null(), &mut a), QdgStatus::Ok);
        assert_eq!(qdg_credal_from_extreme_points(2, 1, half.as_ptr(), ptr::null(), &mut b), QdgStatus::Ok);
        let mut ext = ptr::null_mut();
        assert_eq!(qdg_natural_extension(a, b, &mut ext), QdgStatus::Ok);
        assert_eq!(qdg_credal_dim(ext), 4);
        let mut bell = [0.0; 16];
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            bell[i * 4 + j] = 0.5;
        }
        let mut member = 0;
        assert_eq!(qdg_credal_contains(ext, bell.as_ptr(), ptr::null(), &mut member), QdgStatus::Ok);
        assert_eq!(member, 1);
        let mut marg = ptr::null_mut();
        assert_eq!(qdg_credal_marginal(ext, 2, 2, 0, &mut marg), QdgStatus::Ok);
        let z = [1., 0., 0., -1.];
        let (mut lo, mut up) = (0.0, 0.0);
        assert_eq!(qdg_prevision(marg, z.as_ptr(), ptr::null(), &mut lo, &mut up), QdgStatus::Ok);
        assert!(lo.abs() < 1e-6 && up.abs() < 1e-6);

        let head = [1., 0., 0., 0.];
        let mut cond = ptr::null_mut();
        assert_eq!(qdg_credal_condition(a, head.as_ptr(), ptr::null(), &mut cond), QdgStatus::Ok);
        assert_eq!(qdg_prevision(cond, head.as_ptr(), ptr::null(), &mut lo, &mut up), QdgStatus::Ok);
        assert!((lo - 1.0).abs() < 1e-8 && (up - 1.0).abs() < 1e-8);

        let mut mins = [0.0; 4];
        let mut holds = [0; 4];
        assert_eq!(qdg_frechet_check(2, 2, bell.as_ptr(), ptr::null(), mins.as_mut_ptr(), holds.as_mut_ptr()), QdgStatus::Ok);
        assert_eq!(holds[..2], [0, 0]);
        assert!((mins[0] + 0.5).abs() < 1e-9);

        for h in [a, b, ext, marg, cond] {
            qdg_credal_free(h);
        }
    }
}

#[test]
fn born_and_evolve() {
    let plus = [0.5, 0.5, 0.5, 0.5];
    let proj = [1., 0., 0., 0., 0., 0., 0., 1.];
    let mut p = [0.0; 2];
    let st = unsafe { qdg_born_probabilities(2, plus.as_ptr(), ptr::null(), 2, proj.as_ptr(), ptr::null(), p.as_mut_ptr()) };
    assert_eq!(st, QdgStatus::Ok);
    assert!((p[0] - 0.5).abs() < 1e-12);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let u = [h, h, h, -h];
    let mut set = ptr::null_mut();
    let zero = [1., 0., 0., 0.];
    unsafe {
        assert_eq!(qdg_credal_from_extreme_points(2, 1, zero.as_ptr(), ptr::null(), &mut set), QdgStatus::Ok);
        let mut moved = ptr::null_mut();
        assert_eq!(qdg_credal_evolve(set, u.as_ptr(), ptr::null(), 0, &mut moved), QdgStatus::Ok);
        let mut member = 0;
        assert_eq!(qdg_credal_contains(moved, plus.as_ptr(), ptr::null(), &mut member), QdgStatus::Ok);
        assert_eq!(member, 1);
        qdg_credal_free(set);
        qdg_credal_free(moved);
    }
}

#[test]
fn scenario_round_trip() {
    let cmd = CString::new("check").unwrap();
    let text = CString::new(include_str!("../../core/scenarios/quantum_coin_case4.json")).unwrap();
    let mut report = ptr::null_mut();
    let mut code = 0;
    let st = unsafe { qdg_run_scenario(cmd.as_ptr(), text.as_ptr(), &mut report, &mut code) };
    assert_eq!(st, QdgStatus::Ok);
    assert_eq!(code, 2);
    let json: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(report) }.to_str().unwrap()).unwrap();
    assert_eq!(json["result"]["status"], "incoherent");
    unsafe { qdg_string_free(report) };
    let bad = CString::new("nope").unwrap();
    let st = unsafe { qdg_run_scenario(bad.as_ptr(), text.as_ptr(), &mut report, &mut code) };
    assert_eq!(st, QdgStatus::InvalidArgument);
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let lib = dir.join("libqdg_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_lists_exports() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qdg.h")).unwrap();
    for name in [
        "qdg_last_error_message",
        "qdg_check_coherence",
        "qdg_credal_vacuous",
        "qdg_credal_from_assessments",
        "qdg_credal_free",
        "qdg_prevision",
        "qdg_run_scenario",
        "typedef struct QdgCredalSet QdgCredalSet",
        "QDG_STATUS_INCOHERENT = 8",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_header() {
    let Some(lib) = static_lib() else {
        panic!("static library not found next to the test binary");
    };
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("qdg_smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "smoke exit {:?}", run.status.code());
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("-2.3027756377 1.3027756377"), "{text}");
}
