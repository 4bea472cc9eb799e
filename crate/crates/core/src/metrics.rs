//! Safety statistics per trial and their aggregation across a batch.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::control::ControllerParams;
use crate::error::{Error, Result};
use crate::operator::{SafetyMode, Skill};
use crate::sim::{EventKind, TrialLog};

/// Histogram bin width for the most probable force, mN.
pub const MODE_BIN_WIDTH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    /// s
    pub total_time: f64,
    /// Time with F_s strictly above L3, s.
    pub time_over_unsafe: f64,
    /// mN
    pub mean_force: f64,
    /// Histogram mode of F_s, mN.
    pub max_probable_force: f64,
    pub n_switches: usize,
}

impl TrialMetrics {
    pub fn unsafe_fraction(&self) -> f64 {
        if self.total_time > 0.0 {
            self.time_over_unsafe / self.total_time
        } else {
            0.0
        }
    }
}

/// Center of the most populated `width`-wide bin (bins start at multiples of
/// `width`; ties go to the lower bin), clamped into `[min, max]` of the data.
pub fn histogram_mode(values: &[f64], width: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        *counts.entry((v / width).floor() as i64).or_default() += 1;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    // BTreeMap iterates bins in ascending order; strict `>` keeps the lower
    // bin on ties.
    let mut best = (i64::MIN, 0usize);
    for (&bin, &count) in &counts {
        if count > best.1 {
            best = (bin, count);
        }
    }
    let center = (best.0 as f64 + 0.5) * width;
    Some(center.clamp(lo, hi))
}

pub fn compute_metrics(log: &TrialLog, params: &ControllerParams) -> Result<TrialMetrics> {
    let samples = &log.samples;
    let last = samples.last().ok_or(Error::EmptyLog)?;
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN times count as unsorted
    if let Some(i) = samples.windows(2).position(|w| !(w[1].t > w[0].t)) {
        return Err(Error::UnsortedLog(i + 1));
    }
    let over = samples.iter().filter(|s| s.fs > params.l3).count();
    let forces: Vec<f64> = samples.iter().map(|s| s.fs).collect();
    let mean_force = forces.iter().sum::<f64>() / forces.len() as f64;
    Ok(TrialMetrics {
        total_time: last.t,
        time_over_unsafe: log.dt * over as f64,
        mean_force,
        max_probable_force: histogram_mode(&forces, MODE_BIN_WIDTH).unwrap_or(0.0),
        n_switches: log.events_of(EventKind::SwitchOn).count(),
    })
}

/// Sample mean and (n−1) standard deviation; `std` is absent for one value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: Option<f64>,
}

impl Stat {
    /// Welford's single-pass recurrence.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut n = 0usize;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for x in values {
            n += 1;
            let delta = x - mean;
            mean += delta / n as f64;
            m2 += delta * (x - mean);
        }
        match n {
            0 => Err(Error::EmptyBatch),
            1 => Ok(Stat { mean, std: None }),
            _ => Ok(Stat {
                mean,
                std: Some((m2 / (n - 1) as f64).max(0.0).sqrt()),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub n_trials: usize,
    pub total_time: Stat,
    pub time_over_unsafe: Stat,
    pub mean_force: Stat,
    pub max_probable_force: Stat,
    pub n_switches: Stat,
    pub unsafe_fraction: Stat,
}

pub fn aggregate(metrics: &[TrialMetrics]) -> Result<MetricsSummary> {
    if metrics.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let field = |f: fn(&TrialMetrics) -> f64| Stat::of(metrics.iter().map(f));
    Ok(MetricsSummary {
        n_trials: metrics.len(),
        total_time: field(|m| m.total_time)?,
        time_over_unsafe: field(|m| m.time_over_unsafe)?,
        mean_force: field(|m| m.mean_force)?,
        max_probable_force: field(|m| m.max_probable_force)?,
        n_switches: field(|m| m.n_switches as f64)?,
        unsafe_fraction: field(TrialMetrics::unsafe_fraction)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub mode: SafetyMode,
    pub skill: Skill,
    pub summary: MetricsSummary,
    pub trials: Vec<TrialMetrics>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AggregateReport {
    pub conditions: Vec<ConditionReport>,
}

impl AggregateReport {
    pub fn push(&mut self, mode: SafetyMode, skill: Skill, trials: Vec<TrialMetrics>) -> Result<()> {
        let summary = aggregate(&trials)?;
        self.conditions.push(ConditionReport {
            mode,
            skill,
            summary,
            trials,
        });
        Ok(())
    }

    pub fn condition(&self, mode: SafetyMode, skill: Skill) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.mode == mode && c.skill == skill)
    }

    /// Plain-text comparison table, one row per condition.
    pub fn table(&self) -> String {
        use std::fmt::Write;
        let cell = |s: &Stat, prec: usize| match s.std {
            Some(sd) => format!("{:.prec$} ({:.prec$})", s.mean, sd),
            None => format!("{:.prec$}", s.mean),
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:<13} {:>6} {:>18} {:>18} {:>18} {:>18} {:>14}",
            "mode", "profile", "trials", "total time [s]", "time >L3 [s]", "mean Fs [mN]", "probable Fs [mN]", "switches"
        );
        for c in &self.conditions {
            let s = &c.summary;
            let _ = writeln!(
                out,
                "{:<8} {:<13} {:>6} {:>18} {:>18} {:>18} {:>18} {:>14}",
                c.mode.as_str(),
                c.skill.as_str(),
                s.n_trials,
                cell(&s.total_time, 2),
                cell(&s.time_over_unsafe, 3),
                cell(&s.mean_force, 1),
                cell(&s.max_probable_force, 1),
                cell(&s.n_switches, 1),
            );
        }
        out
    }
}
