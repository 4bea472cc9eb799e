use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use sclera_sim::operator::{SafetyMode, Skill};
use sclera_sim::sim::{run_trial, ScenarioConfig};
use sclera_sim_ffi::*;

fn last_error() -> String {
    let p = ss_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scenario(mode: i32, skill: i32, seed: u64) -> *mut SsScenario {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ss_scenario_default(mode, skill, seed, &mut s) }, SsStatus::Ok);
    s
}

#[test]
fn trial_through_the_abi_matches_the_engine() {
    let s = scenario(SS_MODE_ACTIVE, SS_SKILL_NOVICE, 9);
    let mut trial = ptr::null_mut();
    assert_eq!(unsafe { ss_run_trial(s, &mut trial) }, SsStatus::Ok);

    let direct = run_trial(&ScenarioConfig::new(SafetyMode::Active, Skill::Novice, 9)).unwrap();
    let mut n = 0usize;
    assert_eq!(unsafe { ss_trial_sample_count(trial, &mut n) }, SsStatus::Ok);
    assert_eq!(n, direct.samples.len());

    for i in [0, n / 2, n - 1] {
        let mut sample = SsSample::default();
        assert_eq!(unsafe { ss_trial_sample(trial, i, &mut sample) }, SsStatus::Ok);
        let d = &direct.samples[i];
        assert_eq!((sample.t, sample.fs, sample.twist), (d.t, d.fs, d.twist));
    }
    let mut sample = SsSample::default();
    assert_eq!(unsafe { ss_trial_sample(trial, n, &mut sample) }, SsStatus::OutOfRange);
    assert!(last_error().contains(&n.to_string()));

    let mut m = SsMetrics::default();
    assert_eq!(unsafe { ss_trial_metrics(trial, &mut m) }, SsStatus::Ok);
    assert!(m.completed && m.n_switches > 0);
    assert_eq!(m.time_over_unsafe, 0.0);

    unsafe {
        ss_trial_free(trial);
        ss_scenario_free(s);
    }
}

#[test]
fn toml_scenarios_and_setters() {
    let text = CString::new("mode = \"passive\"\ntimeout = 3.0\n[profile]\nskill = \"expert\"\n").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ss_scenario_from_toml(text.as_ptr(), &mut s) }, SsStatus::Ok);
    assert_eq!(unsafe { ss_scenario_set_seed(s, 77) }, SsStatus::Ok);
    assert_eq!(unsafe { ss_scenario_set_mode(s, 5) }, SsStatus::InvalidArgument);

    let mut trial = ptr::null_mut();
    assert_eq!(unsafe { ss_run_trial(s, &mut trial) }, SsStatus::Ok);
    let mut m = SsMetrics::default();
    assert_eq!(unsafe { ss_trial_metrics(trial, &mut m) }, SsStatus::Ok);
    assert!(!m.completed);
    assert!((m.total_time - 3.0).abs() < 1e-9);
    assert_eq!(m.n_switches, 0);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trial.csv");
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { ss_trial_write_csv(trial, c_path.as_ptr()) }, SsStatus::Ok);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,fsx,fsy,fs,mode,alarm"));

    let bad_path = CString::new("/nonexistent/dir/x.csv").unwrap();
    assert_eq!(unsafe { ss_trial_write_csv(trial, bad_path.as_ptr()) }, SsStatus::Io);
    assert!(last_error().contains("/nonexistent/dir/x.csv"));

    unsafe {
        ss_trial_free(trial);
        ss_scenario_free(s);
    }
}

#[test]
fn errors_are_reported_not_raised() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ss_scenario_default(9, SS_SKILL_EXPERT, 0, &mut s) }, SsStatus::InvalidArgument);
    assert!(s.is_null());
    assert_eq!(unsafe { ss_scenario_default(SS_MODE_ACTIVE, SS_SKILL_EXPERT, 0, ptr::null_mut()) }, SsStatus::NullPointer);

    let bad = CString::new("dt = -1.0\n").unwrap();
    assert_eq!(unsafe { ss_scenario_from_toml(bad.as_ptr(), &mut s) }, SsStatus::InvalidConfig);
    let unknown = CString::new("bogus = 1\n").unwrap();
    assert_eq!(unsafe { ss_scenario_from_toml(unknown.as_ptr(), &mut s) }, SsStatus::InvalidConfig);
    assert!(last_error().contains("bogus"));

    let mut trial = ptr::null_mut();
    assert_eq!(unsafe { ss_run_trial(ptr::null(), &mut trial) }, SsStatus::NullPointer);
    let mut n = 0usize;
    assert_eq!(unsafe { ss_trial_sample_count(ptr::null(), &mut n) }, SsStatus::NullPointer);

    unsafe {
        ss_scenario_free(ptr::null_mut());
        ss_trial_free(ptr::null_mut());
    }
}

#[test]
fn diverging_trial_reports_status() {
    let text = CString::new("[sclera]\nkx = 1e308\nrest_x = -1e10\n").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ss_scenario_from_toml(text.as_ptr(), &mut s) }, SsStatus::Ok);
    let mut trial = ptr::null_mut();
    assert_eq!(unsafe { ss_run_trial(s, &mut trial) }, SsStatus::SimulationDiverged);
    assert!(trial.is_null());
    assert!(last_error().contains("non-finite") || last_error().contains("diverge"));
    unsafe { ss_scenario_free(s) };
}

#[test]
fn oracle_converges() {
    let mut err = f64::NAN;
    assert_eq!(unsafe { ss_oracle_1dof(400.0, 120.0, 60.0, 10.0, 1e-3, &mut err) }, SsStatus::Ok);
    assert!(err.abs() < 1.0);
    assert_eq!(unsafe { ss_oracle_1dof(-1.0, 0.0, 0.0, 1.0, 1e-3, &mut err) }, SsStatus::InvalidArgument);
    assert_eq!(unsafe { ss_oracle_1dof(100.0, 0.0, 10.0, 1.0, 0.0, &mut err) }, SsStatus::InvalidConfig);
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(ss_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_the_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sclera_sim.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "ss_scenario_default",
        "ss_scenario_from_toml",
        "ss_run_trial",
        "ss_trial_sample",
        "ss_trial_metrics",
        "ss_trial_free",
        "ss_last_error_message",
        "SS_STATUS_SIMULATION_DIVERGED",
        "typedef struct SsTrial SsTrial;",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }

    // Syntax-check as C when a compiler is around; skip silently otherwise.
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
    else {
        return;
    };
    assert!(status.success(), "header does not compile as C99");
}
