//! Randomized convergence sweep over the single-axis adaptive loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::control::{run_1dof, OneDofGains, OneDofPlant, OneDofReference};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub cases: usize,
    pub seed: u64,
    pub gains: OneDofGains,
    /// s
    pub duration: f64,
    /// s
    pub dt: f64,
    /// Pass threshold on |ΔF| at the end of the run, mN.
    pub tolerance: f64,
    /// Stiffness range, mN/mm.
    pub k_range: (f64, f64),
    /// Largest initial |ΔF|, mN.
    pub max_initial_error: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            cases: 50,
            seed: 7,
            gains: OneDofGains::from(&crate::control::ControllerParams::default()),
            duration: 10.0,
            dt: 0.001,
            tolerance: 1.0,
            k_range: (50.0, 1000.0),
            max_initial_error: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCase {
    pub index: usize,
    pub k: f64,
    pub f_d: f64,
    pub initial_error: f64,
    pub final_error: f64,
    pub passed: bool,
}

/// Draw `cases` random plants and constant references and run each loop.
///
/// The desired force lies in [10, 150] mN and the initial contact force
/// keeps its sign (`F_e(0) = F_d + ΔF(0) >= 0`).
pub fn convergence_sweep(cfg: &SweepConfig) -> Result<Vec<OracleCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.cases)
        .map(|index| {
            let k = rng.random_range(cfg.k_range.0..=cfg.k_range.1);
            let f_d = rng.random_range(10.0..=150.0);
            let lo = -cfg.max_initial_error.min(f_d);
            let initial_error = rng.random_range(lo..=cfg.max_initial_error);
            let plant = OneDofPlant::with_force(k, f_d + initial_error);
            let trace = run_1dof(&plant, OneDofReference::Constant(f_d), cfg.gains, cfg.duration, cfg.dt)?;
            let final_error = trace.final_abs_error();
            Ok(OracleCase {
                index,
                k,
                f_d,
                initial_error,
                final_error,
                passed: final_error.is_finite() && final_error < cfg.tolerance,
            })
        })
        .collect()
}

/// Human-readable report, one line per case plus a summary.
pub fn render_report(cfg: &SweepConfig, cases: &[OracleCase]) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for c in cases {
        let _ = writeln!(
            out,
            "case {:>3}  k={:>8.2} mN/mm  F_d={:>7.2} mN  dF0={:>8.2} mN  |dF|({}s)={:.3e} mN  {}",
            c.index,
            c.k,
            c.f_d,
            c.initial_error,
            cfg.duration,
            c.final_error,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    let worst = cases.iter().map(|c| c.final_error).fold(0.0, f64::max);
    let failed = cases.iter().filter(|c| !c.passed).count();
    let _ = writeln!(
        out,
        "{} cases, {} failed, max residual |dF| = {:.3e} mN (tolerance {} mN)",
        cases.len(),
        failed,
        worst,
        cfg.tolerance
    );
    out
}
