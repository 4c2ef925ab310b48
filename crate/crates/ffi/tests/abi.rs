use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use hapticvlm_ffi::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let mut needed = 0usize;
    unsafe {
        assert_eq!(
            hv_last_error_message(buf.as_mut_ptr(), buf.len(), &mut needed),
            HvStatus::Ok
        );
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn cosine_anchor_and_errors() {
    let (a, b) = ([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]);
    let mut out = 0.0;
    unsafe {
        assert_eq!(hv_cosine_similarity(a.as_ptr(), b.as_ptr(), 3, &mut out), HvStatus::Ok);
        assert!((out - 0.974632).abs() < 1e-6);
        assert_eq!(
            hv_cosine_similarity(ptr::null(), b.as_ptr(), 3, &mut out),
            HvStatus::NullPointer
        );
        assert!(last_error().contains("null"));
        let z = [0.0; 3];
        assert_eq!(
            hv_cosine_similarity(a.as_ptr(), z.as_ptr(), 3, &mut out),
            HvStatus::DegenerateVector
        );
    }
}

#[test]
fn database_handle_lifecycle() {
    let path = CString::new(fixture("materials.txt").to_str().unwrap()).unwrap();
    let mut db = ptr::null_mut();
    unsafe {
        assert_eq!(hv_database_load(path.as_ptr(), &mut db), HvStatus::Ok);
        assert_eq!(hv_database_len(db), 6);
        let mut q = [0.0; 8];
        q[2] = 1.0;
        let mut m = HvMatch {
            index: 99,
            similarity: 0.0,
        };
        assert_eq!(hv_database_match(db, q.as_ptr(), 8, 0.0, &mut m), HvStatus::Ok);
        let mut needed = 0;
        assert_eq!(
            hv_database_name(db, m.index, ptr::null_mut(), 0, &mut needed),
            HvStatus::BufferTooSmall
        );
        assert_eq!(needed, "glass".len() + 1);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(
            hv_database_name(db, m.index, buf.as_mut_ptr(), needed, ptr::null_mut()),
            HvStatus::Ok
        );
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "glass");
        assert_eq!(
            hv_database_audio_key(db, m.index, buf.as_mut_ptr(), needed, ptr::null_mut()),
            HvStatus::Ok
        );
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "GT");
        assert_eq!(
            hv_database_name(db, 42, buf.as_mut_ptr(), needed, ptr::null_mut()),
            HvStatus::InvalidArgument
        );
        hv_database_free(db);
        let missing = CString::new("/nonexistent/materials.hvdb").unwrap();
        assert_eq!(hv_database_load(missing.as_ptr(), &mut db), HvStatus::Io);
    }
}

#[test]
fn synth_and_thermal() {
    let code = CString::new("mw").unwrap();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(hv_synth_render(code.as_ptr(), 16_000, &mut s), HvStatus::Ok);
        assert_eq!(hv_samples_rate(s), 16_000);
        let samples = std::slice::from_raw_parts(hv_samples_data(s), hv_samples_len(s));
        let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 0.9).abs() < 1e-9);
        hv_samples_free(s);
        assert_eq!(hv_synth_render(code.as_ptr(), 100, &mut s), HvStatus::InvalidArgument);

        let mut t = ptr::null_mut();
        assert_eq!(
            hv_thermal_new_with(2.0, 10.0, 25.0, 20.0, 15.0, 0.0, 60.0, &mut t),
            HvStatus::InvalidArgument
        );
        assert_eq!(hv_thermal_new(&mut t), HvStatus::Ok);
        hv_thermal_set_mode(t, HvThermalMode::Cold);
        let mut plate = 0.0;
        assert_eq!(hv_thermal_step(t, 1e9, &mut plate), HvStatus::Ok);
        assert!((plate - 15.0).abs() < 1e-9);
        assert_eq!(hv_thermal_step(t, -1.0, &mut plate), HvStatus::InvalidArgument);
        assert_eq!(hv_thermal_temperature(t), plate);
        hv_thermal_free(t);
    }
}

#[test]
fn parse_and_stats() {
    let mut c = 0.0;
    let mut p = 0.0;
    unsafe {
        let text = CString::new("between 20 and 22 degrees").unwrap();
        assert_eq!(hv_parse_temperature(text.as_ptr(), &mut c), HvStatus::Ok);
        assert_eq!(c, 21.0);
        let junk = CString::new("no idea").unwrap();
        assert_eq!(hv_parse_temperature(junk.as_ptr(), &mut c), HvStatus::Parse);
        assert_eq!(hv_f_survival(1.92, 9.0, 72.0, &mut p), HvStatus::Ok);
        assert!((p - 0.063).abs() < 0.002);
        assert_eq!(hv_f_survival(1.0, 0.0, 72.0, &mut p), HvStatus::InvalidArgument);
    }
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_against_header() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libhapticvlm_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("smoke");
    let status = match Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
    {
        Ok(s) => s,
        Err(e) => {
            eprintln!("skipping: no C compiler ({e})");
            return;
        }
    };
    assert!(status.success(), "C compile failed");
    let wav = tmp.path().join("gt.wav");
    let out = Command::new(&bin)
        .arg(fixture("materials.txt"))
        .arg(&wav)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
    assert_eq!(std::fs::metadata(&wav).unwrap().len(), 44 + 2 * 16_000);
}
