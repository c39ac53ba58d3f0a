use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use fuzzy_witness_ffi::*;

struct Handles {
    corr: *mut FwCorrelator,
    witness: *mut FwWitness,
}

impl Handles {
    fn new(kind: FwWitnessKind, m: usize, n: u32, p: f64, delta: f64, spread: f64) -> Self {
        let mut corr = ptr::null_mut();
        let mut witness = ptr::null_mut();
        unsafe {
            assert_eq!(
                fw_correlator_new(n, p, delta, spread, &mut corr),
                FwStatus::Ok
            );
            assert_eq!(fw_witness_new(kind, m, &mut witness), FwStatus::Ok);
        }
        Self { corr, witness }
    }
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            fw_correlator_free(self.corr);
            fw_witness_free(self.witness);
        }
    }
}

fn last_error() -> String {
    let p = fw_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn correlator_and_witness_values() {
    let h = Handles::new(FwWitnessKind::Bell, 2, 5, 1.0, 0.0, 0.5);
    let mut v = 0.0;
    unsafe {
        assert_eq!(fw_correlator_value(h.corr, 0.2, -0.2, &mut v), FwStatus::Ok);
        assert!((v + (-1.0f64).exp()).abs() < 1e-12);

        let mut bound = 0.0;
        assert_eq!(fw_witness_bound(h.witness, &mut bound), FwStatus::Ok);
        assert_eq!(bound, 2.0);

        let (alice, bob) = ([0.0, 0.3], [0.4, 1.2]);
        assert_eq!(
            fw_witness_evaluate(h.witness, h.corr, alice.as_ptr(), bob.as_ptr(), 2, &mut v),
            FwStatus::Ok
        );
        let c = |a: f64, b: f64| -(-1.0f64).exp() * (2.0 * (a + b)).cos();
        let want = c(0.0, 0.4) + c(0.0, 1.2) + c(0.3, 0.4) - c(0.3, 1.2);
        assert!((v - want).abs() < 1e-12);

        assert_eq!(
            fw_witness_evaluate(h.witness, h.corr, alice.as_ptr(), bob.as_ptr(), 3, &mut v),
            FwStatus::DimensionMismatch
        );
    }
}

#[test]
fn maximize_is_deterministic_and_reports_angles() {
    let h = Handles::new(FwWitnessKind::Steering, 3, 5, 1.0, 0.0, 0.0);
    let config = fw_optimizer_config_default();
    let (mut v1, mut v2) = (0.0, 0.0);
    let (mut a1, mut a2) = ([0.0; 6], [0.0; 6]);
    unsafe {
        assert_eq!(
            fw_maximize(h.witness, h.corr, &config, &mut v1, a1.as_mut_ptr(), 6),
            FwStatus::Ok
        );
        assert_eq!(
            fw_maximize(h.witness, h.corr, &config, &mut v2, a2.as_mut_ptr(), 6),
            FwStatus::Ok
        );
        assert_eq!(
            fw_maximize(h.witness, h.corr, &config, &mut v2, ptr::null_mut(), 0),
            FwStatus::Ok
        );
        assert_eq!(
            fw_maximize(h.witness, h.corr, &config, &mut v2, a2.as_mut_ptr(), 5),
            FwStatus::DimensionMismatch
        );
    }
    assert!((v1 - 3f64.sqrt()).abs() < 1e-6);
    assert_eq!(v1.to_bits(), v2.to_bits());
    assert_eq!(a1, a2);
}

#[test]
fn transition_searches() {
    let h = Handles::new(FwWitnessKind::Bell, 2, 5, 1.0, 0.0, 0.0);
    let config = fw_optimizer_config_default();
    let mut t = FwTransition::default();
    unsafe {
        assert_eq!(
            fw_find_critical_reference(h.witness, &config, 5, 0.8, 0.0, 0.0, 1.0, 1e-8, &mut t),
            FwStatus::Ok
        );
        assert!((t.ref_spread_sq - (std::f64::consts::SQRT_2 * 0.8).ln() / 4.0).abs() < 1e-6);

        assert_eq!(
            fw_find_critical_visibility(h.witness, &config, 5, 0.0, 0.0, 1e-8, &mut t),
            FwStatus::Ok
        );
        assert!((t.p - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);

        assert_eq!(
            fw_find_critical_delta(h.witness, &config, 5, 1.0, 0.0, 0.0, 1.0, 1e-3, &mut t),
            FwStatus::NoTransitionAtHi
        );
        assert!(last_error().contains("delta_sq"), "{}", last_error());
        assert_eq!(
            fw_find_critical_delta(h.witness, &config, 5, 1.0, 0.0, 0.0, 100.0, 1e-3, &mut t),
            FwStatus::Ok
        );
        assert!(t.delta_sq > 0.0 && t.delta_sq < 100.0);
        assert_eq!(
            fw_find_critical_delta(h.witness, &config, 5, 1.0, 0.0, 0.0, 100.0, -1.0, &mut t),
            FwStatus::InvalidParameter
        );
    }
}

#[test]
fn null_and_invalid_arguments() {
    let mut v = 0.0;
    let mut corr = ptr::null_mut();
    unsafe {
        assert_eq!(
            fw_correlator_value(ptr::null(), 0.0, 0.0, &mut v),
            FwStatus::NullPointer
        );
        assert!(last_error().contains("corr"));
        assert_eq!(
            fw_correlator_new(5, 1.5, 0.0, 0.0, &mut corr),
            FwStatus::InvalidParameter
        );
        assert!(corr.is_null());
        assert_eq!(
            fw_correlator_new(5, 1.0, 0.0, 0.0, ptr::null_mut()),
            FwStatus::NullPointer
        );
        fw_correlator_free(ptr::null_mut());
        fw_witness_free(ptr::null_mut());
    }
    let d = unsafe { CStr::from_ptr(fw_status_description(FwStatus::NoViolationAtLo)) };
    assert!(d.to_str().unwrap().contains("lower bracket"));
}

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/api-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fuzzy_witness.h"),
    )
    .unwrap();
    for name in [
        "typedef struct FwCorrelator FwCorrelator;",
        "typedef struct FwWitness FwWitness;",
        "FW_STATUS_OK = 0",
        "fw_correlator_new(",
        "fw_maximize(",
        "fw_find_critical_delta(",
        "fw_find_critical_reference(",
        "fw_find_critical_visibility(",
        "fw_last_error_message(void)",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let profile_dir = target_dir();
    let lib = profile_dir.join("libfuzzy_witness_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out_dir = tempfile_dir();
    let exe = out_dir.join("smoke");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
    let _ = std::fs::remove_dir_all(out_dir);
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fuzzy-witness-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
