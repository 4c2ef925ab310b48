//! C ABI over the hapticvlm engine.
//!
//! Every fallible call returns an [`HvStatus`]; on failure the message is
//! available from [`hv_last_error_message`] on the same thread. Objects are
//! opaque handles created by `*_new`/`*_load`/`*_render` and released by the
//! matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use hapticvlm::embedding::{cosine_similarity, EmbeddingDatabase, EmbeddingError, EmbeddingVector};
use hapticvlm::haptics::{export_wav, synthesize, HapticPattern, PatternId, SampleBuffer};
use hapticvlm::service::load_database;
use hapticvlm::study::dist::f_survival;
use hapticvlm::thermal::{PeltierConfig, ThermalMode, ThermalState};
use hapticvlm::vlm::parse_temperature;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    DegenerateVector = 4,
    NoMatch = 5,
    Io = 6,
    Format = 7,
    Parse = 8,
    UnknownPattern = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HvThermalMode {
    Idle = 0,
    Hot = 1,
    Cold = 2,
}

/// Best match from [`hv_database_match`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvMatch {
    /// Record index, usable with [`hv_database_name`] and [`hv_database_audio_key`].
    pub index: usize,
    pub similarity: f64,
}

pub struct HvDatabase(EmbeddingDatabase);

pub struct HvSamples(SampleBuffer);

pub struct HvThermal {
    config: PeltierConfig,
    state: ThermalState,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: HvStatus, message: impl Into<String>) -> HvStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.into());
    status
}

fn guard(f: impl FnOnce() -> HvStatus) -> HvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(HvStatus::Panic, "internal panic"),
    }
}

fn embedding_status(e: &EmbeddingError) -> HvStatus {
    match e {
        EmbeddingError::Dimension { .. } => HvStatus::DimensionMismatch,
        EmbeddingError::DegenerateVector => HvStatus::DegenerateVector,
        _ => HvStatus::InvalidArgument,
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, HvStatus> {
    if p.is_null() {
        return Err(fail(HvStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(HvStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn vector_arg(p: *const f64, len: usize, name: &str) -> Result<EmbeddingVector, HvStatus> {
    if p.is_null() {
        return Err(fail(HvStatus::NullPointer, format!("{name} is null")));
    }
    let v = std::slice::from_raw_parts(p, len).to_vec();
    EmbeddingVector::new(v).map_err(|e| fail(embedding_status(&e), e.to_string()))
}

/// Copies `s` NUL-terminated into `buf`; reports the needed size in `needed`.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> HvStatus {
    if !needed.is_null() {
        *needed = s.len() + 1;
    }
    if buf.is_null() || len < s.len() + 1 {
        return fail(HvStatus::BufferTooSmall, format!("need {} bytes", s.len() + 1));
    }
    std::ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    HvStatus::Ok
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Copies the calling thread's last error message into `buf`.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes; `needed` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hv_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> HvStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    copy_out(&msg, buf, len, needed)
}

/// Cosine similarity of two `len`-component vectors.
///
/// # Safety
/// `a` and `b` must be valid for `len` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_cosine_similarity(a: *const f64, b: *const f64, len: usize, out: *mut f64) -> HvStatus {
    guard(|| {
        if out.is_null() {
            return fail(HvStatus::NullPointer, "out is null");
        }
        let a = try_ffi!(vector_arg(a, len, "a"));
        let b = try_ffi!(vector_arg(b, len, "b"));
        match cosine_similarity(&a, &b) {
            Ok(s) => {
                *out = s;
                HvStatus::Ok
            }
            Err(e) => fail(embedding_status(&e), e.to_string()),
        }
    })
}

/// Loads a binary or text material database.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_database_load(path: *const c_char, out: *mut *mut HvDatabase) -> HvStatus {
    guard(|| {
        if out.is_null() {
            return fail(HvStatus::NullPointer, "out is null");
        }
        let path = try_ffi!(str_arg(path, "path"));
        match load_database(Path::new(path)) {
            Ok(db) => {
                *out = Box::into_raw(Box::new(HvDatabase(db)));
                HvStatus::Ok
            }
            Err(e) => {
                let status = match e {
                    hapticvlm::embedding::FormatError::Io(_) => HvStatus::Io,
                    _ => HvStatus::Format,
                };
                fail(status, e.to_string())
            }
        }
    })
}

/// # Safety
/// `db` must be null or a handle from [`hv_database_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hv_database_free(db: *mut HvDatabase) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// # Safety
/// `db` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hv_database_len(db: *const HvDatabase) -> usize {
    db.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `db` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hv_database_dimension(db: *const HvDatabase) -> usize {
    db.as_ref().map_or(0, |d| d.0.dimension())
}

/// Best match for `query`; `HV_STATUS_NO_MATCH` when nothing reaches `threshold`.
///
/// # Safety
/// `db` must be a live handle, `query` valid for `len` reads, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hv_database_match(
    db: *const HvDatabase,
    query: *const f64,
    len: usize,
    threshold: f64,
    out: *mut HvMatch,
) -> HvStatus {
    guard(|| {
        let Some(db) = db.as_ref() else {
            return fail(HvStatus::NullPointer, "db is null");
        };
        if out.is_null() {
            return fail(HvStatus::NullPointer, "out is null");
        }
        let q = try_ffi!(vector_arg(query, len, "query"));
        match db.0.match_material(&q, threshold) {
            Ok(Some(m)) => {
                let index = db.0.records().iter().position(|r| r.name == m.material).unwrap_or(0);
                *out = HvMatch {
                    index,
                    similarity: m.similarity,
                };
                HvStatus::Ok
            }
            Ok(None) => fail(HvStatus::NoMatch, format!("no material reaches similarity {threshold}")),
            Err(e) => fail(embedding_status(&e), e.to_string()),
        }
    })
}

unsafe fn record_field(
    db: *const HvDatabase,
    index: usize,
    field: fn(&hapticvlm::embedding::MaterialRecord) -> &str,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HvStatus {
    let Some(db) = db.as_ref() else {
        return fail(HvStatus::NullPointer, "db is null");
    };
    match db.0.records().get(index) {
        Some(r) => copy_out(field(r), buf, len, needed),
        None => fail(HvStatus::InvalidArgument, format!("record index {index} out of range")),
    }
}

/// Material name of record `index`.
///
/// # Safety
/// `db` must be a live handle; `buf` null or valid for `len` bytes; `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn hv_database_name(
    db: *const HvDatabase,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HvStatus {
    record_field(db, index, |r| &r.name, buf, len, needed)
}

/// Audio key of record `index`.
///
/// # Safety
/// As for [`hv_database_name`].
#[no_mangle]
pub unsafe extern "C" fn hv_database_audio_key(
    db: *const HvDatabase,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HvStatus {
    record_field(db, index, |r| &r.audio_key, buf, len, needed)
}

/// Renders a builtin pattern ("WC", "GT", "WS", "FR", "MW").
///
/// # Safety
/// `pattern` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_synth_render(
    pattern: *const c_char,
    sample_rate_hz: u32,
    out: *mut *mut HvSamples,
) -> HvStatus {
    guard(|| {
        if out.is_null() {
            return fail(HvStatus::NullPointer, "out is null");
        }
        let code = try_ffi!(str_arg(pattern, "pattern"));
        let id: PatternId = match code.parse() {
            Ok(id) => id,
            Err(e) => return fail(HvStatus::UnknownPattern, format!("{e}")),
        };
        match synthesize(&HapticPattern::builtin(id), sample_rate_hz) {
            Ok(buf) => {
                *out = Box::into_raw(Box::new(HvSamples(buf)));
                HvStatus::Ok
            }
            Err(e) => fail(HvStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hv_samples_len(s: *const HvSamples) -> usize {
    s.as_ref().map_or(0, |s| s.0.samples.len())
}

/// Borrowed pointer to the samples; valid until [`hv_samples_free`].
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hv_samples_data(s: *const HvSamples) -> *const f64 {
    s.as_ref().map_or(std::ptr::null(), |s| s.0.samples.as_ptr())
}

/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hv_samples_rate(s: *const HvSamples) -> u32 {
    s.as_ref().map_or(0, |s| s.0.sample_rate_hz)
}

/// Writes the samples as mono 16-bit PCM WAV.
///
/// # Safety
/// `s` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hv_samples_export_wav(s: *const HvSamples, path: *const c_char) -> HvStatus {
    guard(|| {
        let Some(s) = s.as_ref() else {
            return fail(HvStatus::NullPointer, "samples is null");
        };
        let path = try_ffi!(str_arg(path, "path"));
        match export_wav(&s.0, path) {
            Ok(()) => HvStatus::Ok,
            Err(e) => fail(HvStatus::Io, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must be null or a handle from [`hv_synth_render`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hv_samples_free(s: *mut HvSamples) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Parses a free-text model reply into degrees Celsius.
///
/// # Safety
/// `text` must be a NUL-terminated string; `celsius` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_parse_temperature(text: *const c_char, celsius: *mut f64) -> HvStatus {
    guard(|| {
        if celsius.is_null() {
            return fail(HvStatus::NullPointer, "celsius is null");
        }
        let text = try_ffi!(str_arg(text, "text"));
        match parse_temperature(text) {
            Ok(est) => {
                *celsius = est.celsius;
                HvStatus::Ok
            }
            Err(e) => fail(HvStatus::Parse, e.to_string()),
        }
    })
}

/// Upper-tail probability of the F distribution.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_f_survival(f: f64, df1: f64, df2: f64, out: *mut f64) -> HvStatus {
    guard(|| {
        if out.is_null() {
            return fail(HvStatus::NullPointer, "out is null");
        }
        match f_survival(f, df1, df2) {
            Ok(p) => {
                *out = p;
                HvStatus::Ok
            }
            Err(e) => fail(HvStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Simulated plate with the default device parameters, idle at ambient.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_thermal_new(out: *mut *mut HvThermal) -> HvStatus {
    hv_thermal_new_with(2.0, 10.0, 25.0, 40.0, 15.0, 0.0, 60.0, out)
}

/// Simulated plate with explicit time constants, targets and clamp range.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn hv_thermal_new_with(
    tau_drive_s: f64,
    tau_idle_s: f64,
    ambient_c: f64,
    hot_target_c: f64,
    cold_target_c: f64,
    clamp_min_c: f64,
    clamp_max_c: f64,
    out: *mut *mut HvThermal,
) -> HvStatus {
    guard(|| {
        if out.is_null() {
            return fail(HvStatus::NullPointer, "out is null");
        }
        let config = PeltierConfig {
            tau_drive_s,
            tau_idle_s,
            ambient_c,
            hot_target_c,
            cold_target_c,
            clamp_range_c: (clamp_min_c, clamp_max_c),
            ..PeltierConfig::default()
        };
        if let Err(e) = config.validate() {
            return fail(HvStatus::InvalidArgument, e.to_string());
        }
        let state = ThermalState::at_ambient(&config);
        *out = Box::into_raw(Box::new(HvThermal { config, state }));
        HvStatus::Ok
    })
}

/// # Safety
/// `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hv_thermal_set_mode(t: *mut HvThermal, mode: HvThermalMode) -> HvStatus {
    let Some(t) = t.as_mut() else {
        return fail(HvStatus::NullPointer, "thermal is null");
    };
    let mode = match mode {
        HvThermalMode::Idle => ThermalMode::Idle,
        HvThermalMode::Hot => ThermalMode::Hot,
        HvThermalMode::Cold => ThermalMode::Cold,
    };
    t.state = t.state.set_mode(mode);
    HvStatus::Ok
}

/// Advances by `dt_s` seconds and reports the new plate temperature.
///
/// # Safety
/// `t` must be a live handle; `plate_c` null or writable.
#[no_mangle]
pub unsafe extern "C" fn hv_thermal_step(t: *mut HvThermal, dt_s: f64, plate_c: *mut f64) -> HvStatus {
    guard(|| {
        let Some(t) = t.as_mut() else {
            return fail(HvStatus::NullPointer, "thermal is null");
        };
        match t.state.step(&t.config, dt_s) {
            Ok(s) => {
                t.state = s;
                if !plate_c.is_null() {
                    *plate_c = s.plate_temp_c;
                }
                HvStatus::Ok
            }
            Err(e) => fail(HvStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hv_thermal_temperature(t: *const HvThermal) -> f64 {
    t.as_ref().map_or(f64::NAN, |t| t.state.plate_temp_c)
}

/// # Safety
/// `t` must be null or a handle from `hv_thermal_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hv_thermal_free(t: *mut HvThermal) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}
