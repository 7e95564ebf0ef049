//! C ABI over `odo_core`.
//!
//! Configs and odometers are opaque heap handles created and freed through
//! this API. Fallible calls return an [`OdoStatus`] and write results through
//! out-pointers; nothing panics across the boundary.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use odo_core::encoder;
use odo_core::{OdoConfig, OdoInput, OdoOutput, Odometer, PhaseCode};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigParse = 3,
    ConfigInvalid = 4,
    Panic = 5,
}

/// One sample of the three encoder lines.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OdoPhaseCode {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
}

impl From<OdoPhaseCode> for PhaseCode {
    fn from(c: OdoPhaseCode) -> Self {
        PhaseCode::new(c.c1, c.c2, c.c3)
    }
}

impl From<PhaseCode> for OdoPhaseCode {
    fn from(c: PhaseCode) -> Self {
        OdoPhaseCode { c1: c.c1, c2: c.c2, c3: c.c3 }
    }
}

/// Outputs of one odometer step. Word fields carry the raw 32-bit values.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdoStepOutput {
    pub odometer_status: bool,
    pub odometric_position_valid: bool,
    pub odometric_position_count: u32,
    pub odometric_position_timestamp: u32,
    pub last_marker_position: u32,
    pub last_marker_timestamp: u32,
    /// Millimetres.
    pub relative_position: u32,
    pub speed: i32,
    pub acceleration: i32,
    pub jerk: i32,
    pub cinematics_timestamp: u32,
}

impl From<&OdoOutput> for OdoStepOutput {
    fn from(o: &OdoOutput) -> Self {
        OdoStepOutput {
            odometer_status: o.odometer_status,
            odometric_position_valid: o.odometric_position_valid,
            odometric_position_count: o.odometric_position_count.0,
            odometric_position_timestamp: o.odometric_position_timestamp.0,
            last_marker_position: o.last_marker_position.0,
            last_marker_timestamp: o.last_marker_timestamp.0,
            relative_position: o.relative_position.0,
            speed: o.speed.0,
            acceleration: o.acceleration.0,
            jerk: o.jerk.0,
            cinematics_timestamp: o.cinematics_timestamp.0,
        }
    }
}

/// Opaque odometer configuration.
pub struct OdoConfigHandle {
    inner: OdoConfig,
}

/// Opaque odometer instance. Owns a copy of its configuration.
pub struct OdoMachine {
    inner: Odometer,
}

fn guard<F: FnOnce() -> OdoStatus>(f: F) -> OdoStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(OdoStatus::Panic)
}

fn boxed_config(config: OdoConfig) -> *mut OdoConfigHandle {
    Box::into_raw(Box::new(OdoConfigHandle { inner: config }))
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn odo_status_message(status: OdoStatus) -> *const c_char {
    let s: &'static CStr = match status {
        OdoStatus::Ok => c"ok",
        OdoStatus::NullPointer => c"null pointer argument",
        OdoStatus::InvalidUtf8 => c"string is not valid UTF-8",
        OdoStatus::ConfigParse => c"config JSON could not be parsed",
        OdoStatus::ConfigInvalid => c"config values are inconsistent",
        OdoStatus::Panic => c"internal error",
    };
    s.as_ptr()
}

/// Config reproducing the reference replay transcript. Free with `odo_config_free`.
#[no_mangle]
pub extern "C" fn odo_config_transcript_default() -> *mut OdoConfigHandle {
    boxed_config(OdoConfig::transcript_default())
}

/// Physically derived config (100 teeth, 0.9 m wheel, 10 ms). Free with `odo_config_free`.
#[no_mangle]
pub extern "C" fn odo_config_physical_default() -> *mut OdoConfigHandle {
    boxed_config(OdoConfig::physical_default())
}

/// Parses JSON overrides on top of the physical default.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn odo_config_from_json(json: *const c_char, out: *mut *mut OdoConfigHandle) -> OdoStatus {
    if json.is_null() || out.is_null() {
        return OdoStatus::NullPointer;
    }
    guard(|| {
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => return OdoStatus::InvalidUtf8,
        };
        match OdoConfig::from_json_over(text, &OdoConfig::physical_default()) {
            Ok(config) => {
                *out = boxed_config(config);
                OdoStatus::Ok
            }
            Err(odo_core::config::ConfigError::Parse(_)) => OdoStatus::ConfigParse,
            Err(_) => OdoStatus::ConfigInvalid,
        }
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn odo_config_free(config: *mut OdoConfigHandle) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Creates an odometer starting at table row `init` (taken modulo 6).
///
/// # Safety
/// `config` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn odo_machine_new(
    config: *const OdoConfigHandle,
    init: u64,
    out: *mut *mut OdoMachine,
) -> OdoStatus {
    if config.is_null() || out.is_null() {
        return OdoStatus::NullPointer;
    }
    guard(|| {
        let inner = Odometer::new((*config).inner.clone(), init);
        *out = Box::into_raw(Box::new(OdoMachine { inner }));
        OdoStatus::Ok
    })
}

/// Feeds one sample and writes the resulting outputs.
///
/// # Safety
/// `machine` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn odo_machine_step(
    machine: *mut OdoMachine,
    code: OdoPhaseCode,
    marker: bool,
    out: *mut OdoStepOutput,
) -> OdoStatus {
    if machine.is_null() || out.is_null() {
        return OdoStatus::NullPointer;
    }
    guard(|| {
        let o = (*machine).inner.step(OdoInput { encoder: code.into(), marker });
        *out = OdoStepOutput::from(&o);
        OdoStatus::Ok
    })
}

/// # Safety
/// `machine` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn odo_machine_free(machine: *mut OdoMachine) {
    if !machine.is_null() {
        drop(Box::from_raw(machine));
    }
}

/// Code at table row `n mod 6`.
#[no_mangle]
pub extern "C" fn odo_phase0(n: u64) -> OdoPhaseCode {
    encoder::phase0(n).into()
}

/// Code for one-based index `x` (0 behaves like 1).
#[no_mangle]
pub extern "C" fn odo_phase(x: u64) -> OdoPhaseCode {
    encoder::phase(x).into()
}

/// True when `last -> cur` is neither a stay nor a single step.
#[no_mangle]
pub extern "C" fn odo_seq_fault(last: OdoPhaseCode, cur: OdoPhaseCode) -> bool {
    encoder::seq_fault(last.into(), cur.into())
}

/// True for the all-high and all-low codes.
#[no_mangle]
pub extern "C" fn odo_is_code_error(code: OdoPhaseCode) -> bool {
    encoder::is_code_error(code.into())
}
