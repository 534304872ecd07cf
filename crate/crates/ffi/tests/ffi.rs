use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ebpps_ffi::*;

fn new_sampler(bound: u64, seed: u64) -> *mut EbppsSampler {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ebpps_sampler_new(bound, seed, &mut s) }, EbppsStatus::Ok);
    assert!(!s.is_null());
    s
}

fn golden(s: *mut EbppsSampler) {
    for i in 0..12u64 {
        let w = if i < 6 { 1.0 } else { 4.0 };
        assert_eq!(unsafe { ebpps_sampler_process(s, i, w) }, EbppsStatus::Ok);
    }
}

fn extract(s: *mut EbppsSampler, cap: usize) -> (EbppsStatus, Vec<u64>) {
    let mut ids = vec![0u64; cap];
    let mut len = usize::MAX;
    let status = unsafe { ebpps_sampler_extract(s, ids.as_mut_ptr(), cap, &mut len) };
    ids.truncate(len.min(cap));
    (status, ids)
}

fn snapshot(s: *const EbppsSampler) -> Vec<u8> {
    let mut len = 0;
    let status = unsafe { ebpps_sampler_snapshot(s, ptr::null_mut(), 0, &mut len) };
    assert_eq!(status, EbppsStatus::BufferTooSmall);
    let mut buf = vec![0u8; len];
    assert_eq!(unsafe { ebpps_sampler_snapshot(s, buf.as_mut_ptr(), len, &mut len) }, EbppsStatus::Ok);
    buf
}

#[test]
fn golden_stream_through_the_c_api() {
    let s = new_sampler(10, 1);
    golden(s);
    let mut stats = EbppsStats::default();
    assert_eq!(unsafe { ebpps_sampler_stats(s, &mut stats) }, EbppsStatus::Ok);
    assert_eq!(stats.items_seen, 12);
    assert_eq!(stats.max_weight, 4.0);
    assert_eq!(stats.rho, 0.25);
    assert_eq!(stats.latent_size, 7.5);
    assert_eq!(stats.expected_size, 7.5);
    assert!(stats.total_discards <= stats.items_seen);

    let mut p = 0.0;
    assert_eq!(unsafe { ebpps_sampler_inclusion_probability(s, 2.0, &mut p) }, EbppsStatus::Ok);
    assert!((p - 0.5).abs() < 1e-12);

    for _ in 0..50 {
        let (status, ids) = extract(s, 10);
        assert_eq!(status, EbppsStatus::Ok);
        assert!(ids.len() == 7 || ids.len() == 8);
        assert!((6..12).all(|heavy| ids.contains(&heavy)));
    }
    unsafe { ebpps_sampler_free(s) };
}

#[test]
fn errors_are_reported_as_codes() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ebpps_sampler_new(0, 0, &mut s) }, EbppsStatus::InvalidParameter);
    assert!(s.is_null());
    assert_eq!(unsafe { ebpps_sampler_new(1, 0, ptr::null_mut()) }, EbppsStatus::NullPointer);
    assert_eq!(unsafe { ebpps_sampler_process(ptr::null_mut(), 0, 1.0) }, EbppsStatus::NullPointer);

    let s = new_sampler(3, 0);
    let mut p = 0.0;
    assert_eq!(unsafe { ebpps_sampler_inclusion_probability(s, 1.0, &mut p) }, EbppsStatus::Precondition);
    for w in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert_eq!(unsafe { ebpps_sampler_process(s, 1, w) }, EbppsStatus::InvalidWeight);
    }
    let mut stats = EbppsStats::default();
    unsafe { ebpps_sampler_stats(s, &mut stats) };
    assert_eq!(stats.items_seen, 0);

    for i in 0..5 {
        unsafe { ebpps_sampler_process(s, i, 1.0) };
    }
    let (status, ids) = extract(s, 1);
    assert_eq!(status, EbppsStatus::BufferTooSmall);
    assert!(ids.len() <= 1);

    let junk = b"{not json";
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { ebpps_sampler_restore(junk.as_ptr(), junk.len(), &mut r) }, EbppsStatus::Snapshot);
    assert!(r.is_null());
    unsafe {
        ebpps_sampler_free(s);
        ebpps_sampler_free(ptr::null_mut());
    }
}

#[test]
fn snapshot_restore_continues_identically() {
    let a = new_sampler(4, 9);
    let b = new_sampler(4, 9);
    for i in 0..20 {
        unsafe {
            ebpps_sampler_process(a, i, 1.0 + (i % 5) as f64);
            ebpps_sampler_process(b, i, 1.0 + (i % 5) as f64);
        }
    }
    let buf = snapshot(a);
    unsafe { ebpps_sampler_free(a) };
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { ebpps_sampler_restore(buf.as_ptr(), buf.len(), &mut c) }, EbppsStatus::Ok);
    for i in 20..60 {
        unsafe {
            ebpps_sampler_process(b, i, 0.5 + (i % 7) as f64);
            ebpps_sampler_process(c, i, 0.5 + (i % 7) as f64);
        }
    }
    assert_eq!(snapshot(b), snapshot(c));
    assert_eq!(extract(b, 4), extract(c, 4));
    unsafe {
        ebpps_sampler_free(b);
        ebpps_sampler_free(c);
    }
}

#[test]
fn threshold_tau_matches_the_baseline() {
    let weights = [4.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    let mut tau = 0.0;
    let mut incl = [0.0; 10];
    let status = unsafe { ebpps_threshold_tau(weights.as_ptr(), 10, 7, &mut tau, incl.as_mut_ptr()) };
    assert_eq!(status, EbppsStatus::Ok);
    assert!((tau - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(incl[0], 1.0);
    assert!((incl[1] - 2.0 / 3.0).abs() < 1e-12);
    let status = unsafe { ebpps_threshold_tau(ptr::null(), 3, 1, &mut tau, ptr::null_mut()) };
    assert_eq!(status, EbppsStatus::NullPointer);
}

#[test]
fn every_status_has_a_message() {
    use EbppsStatus::*;
    for status in [Ok, NullPointer, InvalidWeight, InvalidParameter, Precondition, BufferTooSmall, Snapshot, Panic] {
        let text = unsafe { CStr::from_ptr(ebpps_status_str(status)) };
        assert!(!text.to_str().unwrap().is_empty());
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn c_compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

#[test]
fn header_is_current_and_parses_as_c() {
    let header = std::fs::read_to_string(crate_dir().join("include/ebpps.h")).unwrap();
    for name in [
        "ebpps_sampler_new",
        "ebpps_sampler_free",
        "ebpps_sampler_process",
        "ebpps_sampler_extract",
        "ebpps_sampler_stats",
        "ebpps_sampler_inclusion_probability",
        "ebpps_sampler_snapshot",
        "ebpps_sampler_restore",
        "ebpps_threshold_tau",
        "ebpps_status_str",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    let Some(cc) = c_compiler() else {
        eprintln!("no C compiler found; skipping syntax check");
        return;
    };
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/smoke.c"))
        .status()
        .unwrap();
    assert!(status.success());
}

/// Static library produced next to the test binary's `deps` directory.
fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libebpps_ffi.a");
    lib.exists().then_some(lib)
}

fn run_c_smoke(cc: &str, lib: &Path) {
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let exe = out_dir.join("ebpps_smoke");
    let status = Command::new(cc)
        .args(["-std=c99", "-I"])
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/smoke.c"))
        .arg(lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "linking the smoke program failed");
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "smoke program failed: {}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("t=12 ") && stdout.contains("heavy=6"), "{stdout}");
}

#[test]
fn c_program_links_and_runs() {
    let (Some(cc), Some(lib)) = (c_compiler(), static_lib()) else {
        eprintln!("C compiler or static library unavailable; skipping");
        return;
    };
    run_c_smoke(&cc, &lib);
}
