//! C ABI over `sclera_sim`.
//!
//! Every function returns an [`SsStatus`]; results come back through out
//! pointers. Handles are opaque and must be released with the matching
//! `*_free`. On failure a message is available from [`ss_last_error_message`]
//! on the same thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sclera_sim::control::{run_1dof_oracle, ControlMode, ControllerParams, OneDofPlant};
use sclera_sim::export::write_samples_csv;
use sclera_sim::metrics::compute_metrics;
use sclera_sim::operator::{AlarmLevel, SafetyMode, Skill};
use sclera_sim::scenario::{Overrides, ScenarioFile};
use sclera_sim::sim::{run_trial, ScenarioConfig, TrialLog};
use sclera_sim::Error;

pub const SS_MODE_ACTIVE: i32 = 0;
pub const SS_MODE_PASSIVE: i32 = 1;

pub const SS_SKILL_EXPERT: i32 = 0;
pub const SS_SKILL_INTERMEDIATE: i32 = 1;
pub const SS_SKILL_NOVICE: i32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    InvalidArgument = 3,
    SimulationDiverged = 4,
    Io = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Resolved scenario. Opaque.
pub struct SsScenario {
    config: ScenarioConfig,
}

/// Completed trial log. Opaque.
pub struct SsTrial {
    config: ScenarioConfig,
    log: TrialLog,
}

/// One logged step. `mode` is 0 for impedance, 1 for adaptive; `alarm` runs
/// 0 (none) to 3 (high).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SsSample {
    pub t: f64,
    pub fsx: f64,
    pub fsy: f64,
    pub fs: f64,
    pub mode: i32,
    pub alarm: i32,
    pub progress: f64,
    pub dx: f64,
    pub dy: f64,
    pub twist: [f64; 6],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SsMetrics {
    pub total_time: f64,
    pub time_over_unsafe: f64,
    pub mean_force: f64,
    pub max_probable_force: f64,
    pub n_switches: usize,
    pub completed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(SsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            _ if e.is_simulation_failure() => SsStatus::SimulationDiverged,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::ScenarioRead { .. } => SsStatus::Io,
            _ => SsStatus::InvalidConfig,
        };
        Fail(status, e.to_string())
    }
}

fn fail<T>(status: SsStatus, msg: impl Into<String>) -> Result<T, Fail> {
    Err(Fail(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SsStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    // SAFETY: caller guarantees p is null or valid for the call's duration.
    unsafe { p.as_ref() }.map_or_else(|| fail(SsStatus::NullPointer, format!("{name} is null")), Ok)
}

unsafe fn as_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return fail(SsStatus::NullPointer, format!("{name} is null"));
    }
    // SAFETY: non-null and NUL-terminated per the API contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .or_else(|_| fail(SsStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

fn out_ptr<T>(out: *mut T, name: &str) -> Result<*mut T, Fail> {
    if out.is_null() {
        fail(SsStatus::NullPointer, format!("{name} is null"))
    } else {
        Ok(out)
    }
}

fn mode_from(code: i32) -> Result<SafetyMode, Fail> {
    match code {
        SS_MODE_ACTIVE => Ok(SafetyMode::Active),
        SS_MODE_PASSIVE => Ok(SafetyMode::Passive),
        _ => fail(SsStatus::InvalidArgument, format!("unknown mode {code}")),
    }
}

fn skill_from(code: i32) -> Result<Skill, Fail> {
    match code {
        SS_SKILL_EXPERT => Ok(Skill::Expert),
        SS_SKILL_INTERMEDIATE => Ok(Skill::Intermediate),
        SS_SKILL_NOVICE => Ok(Skill::Novice),
        _ => fail(SsStatus::InvalidArgument, format!("unknown skill {code}")),
    }
}

fn boxed_scenario(config: ScenarioConfig, out: *mut *mut SsScenario) -> Result<(), Fail> {
    config.validate()?;
    // SAFETY: out checked non-null by the caller of this helper.
    unsafe { *out = Box::into_raw(Box::new(SsScenario { config })) };
    Ok(())
}

/// Default scenario for a mode and skill preset.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ss_scenario_default(mode: i32, skill: i32, seed: u64, out: *mut *mut SsScenario) -> SsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        boxed_scenario(ScenarioConfig::new(mode_from(mode)?, skill_from(skill)?, seed), out)
    })
}

/// Scenario from TOML text. Missing keys take their defaults.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_scenario_from_toml(toml: *const c_char, out: *mut *mut SsScenario) -> SsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let text = unsafe { as_str(toml, "toml")? };
        let config = ScenarioFile::parse(text)?.resolve(Overrides::default())?;
        boxed_scenario(config, out)
    })
}

/// # Safety
/// `scenario` must come from this library and not be freed.
#[no_mangle]
pub unsafe extern "C" fn ss_scenario_set_seed(scenario: *mut SsScenario, seed: u64) -> SsStatus {
    guard(|| {
        let s = unsafe { scenario.as_mut() }.map_or_else(|| fail(SsStatus::NullPointer, "scenario is null"), Ok)?;
        s.config.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from this library and not be freed.
#[no_mangle]
pub unsafe extern "C" fn ss_scenario_set_mode(scenario: *mut SsScenario, mode: i32) -> SsStatus {
    guard(|| {
        let s = unsafe { scenario.as_mut() }.map_or_else(|| fail(SsStatus::NullPointer, "scenario is null"), Ok)?;
        s.config.mode = mode_from(mode)?;
        Ok(())
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must be null or come from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ss_scenario_free(scenario: *mut SsScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Runs one trial. On divergence returns `SimulationDiverged` and writes no
/// handle.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_run_trial(scenario: *const SsScenario, out: *mut *mut SsTrial) -> SsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let s = unsafe { as_ref(scenario, "scenario")? };
        let log = run_trial(&s.config)?;
        unsafe { *out = Box::into_raw(Box::new(SsTrial { config: s.config, log })) };
        Ok(())
    })
}

/// # Safety
/// `trial` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_trial_sample_count(trial: *const SsTrial, out: *mut usize) -> SsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let tr = unsafe { as_ref(trial, "trial")? };
        unsafe { *out = tr.log.samples.len() };
        Ok(())
    })
}

/// # Safety
/// `trial` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_trial_sample(trial: *const SsTrial, index: usize, out: *mut SsSample) -> SsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let tr = unsafe { as_ref(trial, "trial")? };
        let Some(s) = tr.log.samples.get(index) else {
            return fail(SsStatus::OutOfRange, format!("sample {index} of {}", tr.log.samples.len()));
        };
        let sample = SsSample {
            t: s.t,
            fsx: s.fsx,
            fsy: s.fsy,
            fs: s.fs,
            mode: match s.mode {
                ControlMode::Impedance => 0,
                ControlMode::Adaptive => 1,
            },
            alarm: match s.alarm {
                AlarmLevel::None => 0,
                AlarmLevel::Low => 1,
                AlarmLevel::Mid => 2,
                AlarmLevel::High => 3,
            },
            progress: s.progress,
            dx: s.dx,
            dy: s.dy,
            twist: s.twist,
        };
        unsafe { *out = sample };
        Ok(())
    })
}

/// # Safety
/// `trial` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_trial_metrics(trial: *const SsTrial, out: *mut SsMetrics) -> SsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let tr = unsafe { as_ref(trial, "trial")? };
        let m = compute_metrics(&tr.log, &tr.config.controller)?;
        unsafe {
            *out = SsMetrics {
                total_time: m.total_time,
                time_over_unsafe: m.time_over_unsafe,
                mean_force: m.mean_force,
                max_probable_force: m.max_probable_force,
                n_switches: m.n_switches,
                completed: tr.log.completed(),
            }
        };
        Ok(())
    })
}

/// Writes the sample log as CSV.
///
/// # Safety
/// `trial` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ss_trial_write_csv(trial: *const SsTrial, path: *const c_char) -> SsStatus {
    guard(|| {
        let tr = unsafe { as_ref(trial, "trial")? };
        let path = unsafe { as_str(path, "path")? };
        let file = File::create(path).map_err(|e| Fail(SsStatus::Io, format!("{path}: {e}")))?;
        write_samples_csv(&tr.log.samples, BufWriter::new(file))?;
        Ok(())
    })
}

/// Releases a trial. Null is ignored.
///
/// # Safety
/// `trial` must be null or come from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ss_trial_free(trial: *mut SsTrial) {
    if !trial.is_null() {
        drop(unsafe { Box::from_raw(trial) });
    }
}

/// Single-axis adaptive loop against a spring of stiffness `k` (mN/mm)
/// starting at `initial_force`, tracking constant `desired_force`. Writes
/// F_e − F_d at `duration`.
///
/// # Safety
/// `out_final_error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_oracle_1dof(
    k: f64,
    initial_force: f64,
    desired_force: f64,
    duration: f64,
    dt: f64,
    out_final_error: *mut f64,
) -> SsStatus {
    guard(|| {
        let out = out_ptr(out_final_error, "out_final_error")?;
        if !(k.is_finite() && k > 0.0) {
            return fail(SsStatus::InvalidArgument, format!("stiffness must be positive, got {k}"));
        }
        let plant = OneDofPlant::with_force(k, initial_force);
        let trace = run_1dof_oracle(&plant, desired_force, &ControllerParams::default(), duration, dt)?;
        let last = *trace.delta_f.last().expect("trace has the initial sample");
        unsafe { *out = last };
        Ok(())
    })
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
