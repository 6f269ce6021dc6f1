use borb_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn model(kind: BorbModelKind, m: u32, c: f64, degree: u32) -> *mut BorbModel {
    let mut h = ptr::null_mut();
    let st = unsafe { borb_model_new(kind, m, c, degree, false, &mut h) };
    assert_eq!(st, BorbStatus::Ok);
    assert!(!h.is_null());
    h
}

fn space(m: *const BorbModel, p: u32) -> *mut BorbSpace {
    let mut h = ptr::null_mut();
    let st = unsafe { borb_space_new(m, p, 0, 0, &mut h) };
    assert_eq!(st, BorbStatus::Ok, "{:?}", unsafe { CStr::from_ptr(borb_last_error()) });
    h
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(borb_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn fs_kernel_is_p_plus_one() {
    let m = model(BorbModelKind::FsSphere, 1, 0.0, 1);
    let s = space(m, 6);
    assert_eq!(unsafe { borb_space_dimension(s) }, 7);
    assert_eq!(unsafe { borb_space_zero_budget(s) }, 6);
    for (x, y) in [(0.0, 0.0), (0.3, -1.2), (5.0, 2.0)] {
        let mut k = 0.0;
        assert_eq!(unsafe { borb_bergman_kernel(s, x, y, &mut k) }, BorbStatus::Ok);
        assert!((k - 7.0).abs() < 1e-10, "{k}");
        let mut lk = 0.0;
        assert_eq!(unsafe { borb_log_bergman_kernel(s, x, y, &mut lk) }, BorbStatus::Ok);
        assert!((lk - 7f64.ln()).abs() < 1e-10);
        let mut v = 0.0;
        assert_eq!(unsafe { borb_fs_potential(s, x, y, &mut v) }, BorbStatus::Ok);
        let phi = 0.5 * (1.0 + x * x + y * y).ln();
        assert!((v - (0.5 * 7f64.ln() + 6.0 * phi)).abs() < 1e-9, "{v}");
    }
    unsafe {
        borb_space_free(s);
        borb_model_free(m);
    }
}

#[test]
fn zeros_fill_the_budget_and_are_reproducible() {
    let m = model(BorbModelKind::CircleMass, 1, 0.0, 2);
    let s = space(m, 5);
    let budget = unsafe { borb_space_zero_budget(s) } as usize;
    let run = |seed| {
        let (mut re, mut im) = (vec![0.0; budget], vec![0.0; budget]);
        let (mut n, mut inf) = (0usize, 0u32);
        let st = unsafe { borb_sample_zeros(s, seed, 3, re.as_mut_ptr(), im.as_mut_ptr(), budget, &mut n, &mut inf) };
        assert_eq!(st, BorbStatus::Ok);
        assert_eq!(n + inf as usize, budget);
        re.truncate(n);
        im.truncate(n);
        (re, im)
    };
    assert_eq!(run(11), run(11));
    assert_ne!(run(11), run(12));

    let (mut n, mut inf) = (0usize, 0u32);
    let st = unsafe { borb_sample_zeros(s, 11, 3, ptr::null_mut(), ptr::null_mut(), 0, &mut n, &mut inf) };
    assert_eq!(st, BorbStatus::BufferTooSmall);
    assert_eq!(n + inf as usize, budget);
    unsafe {
        borb_space_free(s);
        borb_model_free(m);
    }
}

#[test]
fn curvature_mass_reaches_degree() {
    let m = model(BorbModelKind::Football, 3, 0.0, 1);
    let mut mass = 0.0;
    assert_eq!(unsafe { borb_model_curvature_mass_within(m, 1e12, &mut mass) }, BorbStatus::Ok);
    assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    assert_eq!(unsafe { borb_model_curvature_mass_within(m, -1.0, &mut mass) }, BorbStatus::InvalidArgument);
    unsafe { borb_model_free(m) };
}

#[test]
fn errors_map_to_codes_and_messages() {
    let mut h = ptr::null_mut();
    let st = unsafe { borb_model_new(BorbModelKind::CircleMass, 1, 0.0, 1, false, &mut h) };
    assert_eq!(st, BorbStatus::Config);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { borb_model_new(BorbModelKind::FsSphere, 1, 0.0, 1, false, ptr::null_mut()) },
        BorbStatus::NullPointer
    );
    let mut k = 0.0;
    assert_eq!(unsafe { borb_bergman_kernel(ptr::null(), 0.0, 0.0, &mut k) }, BorbStatus::NullPointer);

    let m = model(BorbModelKind::FsSphere, 1, 0.0, 1);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { borb_space_new(m, 1100, 0, 0, &mut s) }, BorbStatus::IllConditioned);
    assert!(last_error().contains("positive definite"));
    let s = space(m, 2);
    assert_eq!(unsafe { borb_bergman_kernel(s, f64::NAN, 0.0, &mut k) }, BorbStatus::InvalidArgument);
    unsafe {
        borb_space_free(s);
        borb_model_free(m);
        borb_model_free(ptr::null_mut());
        borb_space_free(ptr::null_mut());
    }
    assert_eq!(unsafe { borb_space_dimension(ptr::null()) }, 0);
}

#[test]
fn run_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, r#"{"model": {"kind": "FS_SPHERE"}, "p_grid": [3], "experiments": ["bergman"]}"#).unwrap();
    let out = dir.path().join("out");
    let c_cfg = CString::new(cfg.to_str().unwrap()).unwrap();
    let c_out = CString::new(out.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { borb_run_config(c_cfg.as_ptr(), c_out.as_ptr(), ptr::null(), 0) }, BorbStatus::Ok);
    let manifest = CString::new(out.join("manifest.json").to_str().unwrap()).unwrap();
    let mut bad = usize::MAX;
    assert_eq!(unsafe { borb_verify_manifest(manifest.as_ptr(), &mut bad) }, BorbStatus::Ok);
    assert_eq!(bad, 0);
    std::fs::write(out.join("bergman.csv"), "tampered").unwrap();
    assert_eq!(unsafe { borb_verify_manifest(manifest.as_ptr(), &mut bad) }, BorbStatus::Ok);
    assert_eq!(bad, 1);

    std::fs::write(&cfg, r#"{"model": {"kind": "FS_SPHERE"}, "p_grid": [], "experiments": ["bergman"]}"#).unwrap();
    assert_eq!(unsafe { borb_run_config(c_cfg.as_ptr(), c_out.as_ptr(), ptr::null(), 0) }, BorbStatus::Config);
    assert_eq!(unsafe { borb_run_config(ptr::null(), ptr::null(), ptr::null(), 0) }, BorbStatus::NullPointer);
}

#[test]
fn version_is_nonempty() {
    let v = unsafe { CStr::from_ptr(borb_version()) };
    assert!(!v.to_bytes().is_empty());
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/borb.h")).unwrap();
    for name in ["borb_model_new", "borb_space_new", "borb_bergman_kernel", "borb_sample_zeros", "BORB_STATUS_ILL_CONDITIONED", "typedef struct BorbSpace BorbSpace"] {
        assert!(h.contains(name), "{name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let Ok(out) = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(format!("{dir}/examples/kernel.c"))
        .output()
    else {
        eprintln!("no C compiler, skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
