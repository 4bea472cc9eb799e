//! Simulated operator.
//!
//! The operator pulls the tool toward the lateral displacement demanded by
//! the vessel currently being followed, pushes the tool along the task
//! direction, and adds white hand noise on every channel. In passive mode the
//! operator also reacts to the audio alarm: once the alarm has been at MID or
//! above for longer than the reaction delay, a corrective lateral force is
//! superposed until the alarm falls silent.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::control::ControllerParams;
use crate::error::{ensure_non_negative, Error, Result};
use crate::model::{PlantState, Wrench6};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AlarmLevel {
    None,
    Low,
    Mid,
    High,
}

impl AlarmLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlarmLevel::None => "NONE",
            AlarmLevel::Low => "LOW",
            AlarmLevel::Mid => "MID",
            AlarmLevel::High => "HIGH",
        }
    }
}

/// Boundary values belong to the lower level.
pub fn alarm_level(f_s: f64, params: &ControllerParams) -> AlarmLevel {
    if f_s <= params.l1 {
        AlarmLevel::None
    } else if f_s <= params.l2 {
        AlarmLevel::Low
    } else if f_s <= params.l3 {
        AlarmLevel::Mid
    } else {
        AlarmLevel::High
    }
}

/// Which safety scheme protects the sclera during a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SafetyMode {
    /// Robot runs the switching adaptive controller.
    Active,
    /// Impedance only; the operator reacts to alarms.
    Passive,
}

impl SafetyMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SafetyMode::Active => "active",
            SafetyMode::Passive => "passive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Skill {
    Expert,
    Intermediate,
    Novice,
}

impl Skill {
    pub fn as_str(&self) -> &'static str {
        match self {
            Skill::Expert => "expert",
            Skill::Intermediate => "intermediate",
            Skill::Novice => "novice",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorProfile {
    pub skill: Skill,
    /// Lateral pull toward the vessel demand, mN per mm of error.
    pub task_gain: f64,
    /// Per-channel white hand noise, mN (mN·mm on angular channels).
    pub noise_sigma: f64,
    /// Alarm-to-correction latency, s. Passive mode only.
    pub reaction_delay: f64,
    /// Weight of the corrective pull back to the sclerotomy rest point,
    /// relative to `task_gain`.
    pub correction_gain: f64,
    /// Push along the task direction, mN.
    pub advance_force: f64,
}

impl OperatorProfile {
    pub fn preset(skill: Skill) -> Self {
        let (noise_sigma, reaction_delay) = match skill {
            Skill::Expert => (2.0, 0.3),
            Skill::Intermediate => (4.0, 0.5),
            Skill::Novice => (6.0, 0.7),
        };
        Self {
            skill,
            task_gain: 20.0,
            noise_sigma,
            reaction_delay,
            correction_gain: 2.0,
            advance_force: 6.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("profile.task_gain", self.task_gain)?;
        ensure_non_negative("profile.noise_sigma", self.noise_sigma)?;
        ensure_non_negative("profile.reaction_delay", self.reaction_delay)?;
        ensure_non_negative("profile.correction_gain", self.correction_gain)?;
        if !self.advance_force.is_finite() {
            return Err(Error::invalid("profile.advance_force", "must be finite"));
        }
        Ok(())
    }
}

impl Default for OperatorProfile {
    fn default() -> Self {
        Self::preset(Skill::Intermediate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VesselShape {
    /// No lateral demand anywhere on the path.
    Flat,
    /// Four vessels, each a half-sine bump of lateral demand in its own
    /// direction, visited in a per-trial order.
    #[default]
    Arcs,
}

/// Relative amplitude and direction (rad) of each vessel's lateral demand.
const VESSELS: [(f64, f64); 4] = [
    (1.0, 0.0),
    (0.8, 0.5 * PI),
    (0.9, 1.1 * PI),
    (0.6, 1.6 * PI),
];

pub const VESSEL_COUNT: usize = VESSELS.len();

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VesselProfile {
    pub shape: VesselShape,
    /// Peak lateral demand of the strongest vessel, mm.
    pub amplitude: f64,
}

impl Default for VesselProfile {
    fn default() -> Self {
        Self {
            shape: VesselShape::Arcs,
            amplitude: 0.75,
        }
    }
}

impl VesselProfile {
    pub fn flat() -> Self {
        Self {
            shape: VesselShape::Flat,
            amplitude: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("vessels.amplitude", self.amplitude)
    }

    /// Demanded lateral displacement `d*(progress)`, mm.
    pub fn demand(&self, progress: f64, order: &VesselOrder) -> [f64; 2] {
        match self.shape {
            VesselShape::Flat => [0.0, 0.0],
            VesselShape::Arcs => {
                let p = progress.clamp(0.0, 1.0) * VESSEL_COUNT as f64;
                let slot = (p.floor() as usize).min(VESSEL_COUNT - 1);
                let local = p - slot as f64;
                let (rel, angle) = VESSELS[order.0[slot]];
                let r = self.amplitude * rel * (PI * local).sin();
                let (s, c) = angle.sin_cos();
                [r * c, r * s]
            }
        }
    }
}

/// Order in which the four vessels are followed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VesselOrder(pub [usize; VESSEL_COUNT]);

impl VesselOrder {
    pub const PERMUTATIONS: usize = 24;

    /// Seed-derived order. Consecutive seeds give distinct orders for up to
    /// 24 trials.
    pub fn from_seed(seed: u64) -> Self {
        // 7 is coprime to 24, so the map is a bijection on residues.
        let index = ((seed % 24) * 7 % 24) as usize;
        Self::nth(index)
    }

    /// The `index`-th permutation in lexicographic order.
    pub fn nth(mut index: usize) -> Self {
        let mut pool: Vec<usize> = (0..VESSEL_COUNT).collect();
        let mut out = [0; VESSEL_COUNT];
        let mut fact = (1..VESSEL_COUNT).product::<usize>();
        for (i, slot) in out.iter_mut().enumerate() {
            let pick = index / fact;
            index %= fact;
            *slot = pool.remove(pick);
            if i + 1 < VESSEL_COUNT {
                fact /= VESSEL_COUNT - 1 - i;
            }
        }
        Self(out)
    }
}

/// Operator memory of the alarm, for the passive reaction model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReactionState {
    /// Start of the current unbroken run of MID-or-higher alarms.
    pub mid_since: Option<f64>,
    pub correcting: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReactionChange {
    Started,
    Stopped,
}

impl ReactionState {
    /// Advance the alarm memory to time `t`.
    pub fn observe(&mut self, alarm: AlarmLevel, t: f64, reaction_delay: f64) -> Option<ReactionChange> {
        if self.correcting {
            if alarm < AlarmLevel::Low {
                *self = Self::default();
                return Some(ReactionChange::Stopped);
            }
            return None;
        }
        if alarm >= AlarmLevel::Mid {
            let since = *self.mid_since.get_or_insert(t);
            if t - since > reaction_delay {
                self.correcting = true;
                return Some(ReactionChange::Started);
            }
        } else {
            self.mid_since = None;
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorOutput {
    pub wrench: Wrench6,
    pub reaction: Option<ReactionChange>,
}

/// Hand wrench for one step.
///
/// `demand` is the vessel's lateral demand at the current progress and
/// `advance_dir` the task direction over channels 3..6. Noise is drawn for
/// every channel on every call, so the random stream does not depend on the
/// safety mode.
#[allow(clippy::too_many_arguments)]
pub fn operator_wrench<R: Rng + ?Sized>(
    profile: &OperatorProfile,
    reaction: &mut ReactionState,
    state: &PlantState,
    demand: [f64; 2],
    advance_dir: &[f64; 4],
    alarm: AlarmLevel,
    mode: SafetyMode,
    t: f64,
    rng: &mut R,
) -> OperatorOutput {
    let mut w = [0.0; 6];
    w[0] = profile.task_gain * (demand[0] - state.dx);
    w[1] = profile.task_gain * (demand[1] - state.dy);
    let norm = advance_dir.iter().map(|d| d * d).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (wi, d) in w[2..].iter_mut().zip(advance_dir) {
            *wi = profile.advance_force * d / norm;
        }
    }
    for wi in w.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *wi += profile.noise_sigma * z;
    }

    let change = match mode {
        SafetyMode::Passive => reaction.observe(alarm, t, profile.reaction_delay),
        SafetyMode::Active => None,
    };
    if mode == SafetyMode::Passive && reaction.correcting {
        let pull = profile.correction_gain * profile.task_gain;
        w[0] -= pull * state.dx;
        w[1] -= pull * state.dy;
    }
    OperatorOutput {
        wrench: Wrench6(w),
        reaction: change,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const FWD: [f64; 4] = [1.0, 0.0, 0.0, 0.0];

    #[test]
    fn alarm_examples_and_boundaries() {
        let p = ControllerParams::default();
        assert_eq!(alarm_level(70.0, &p), AlarmLevel::None);
        assert_eq!(alarm_level(105.0, &p), AlarmLevel::Mid);
        assert_eq!(alarm_level(125.0, &p), AlarmLevel::High);
        assert_eq!(alarm_level(80.0, &p), AlarmLevel::None);
        assert_eq!(alarm_level(100.0, &p), AlarmLevel::Low);
        assert_eq!(alarm_level(120.0, &p), AlarmLevel::Mid);
        assert_eq!(alarm_level(120.000001, &p), AlarmLevel::High);
    }

    #[test]
    fn alarm_is_monotone() {
        let p = ControllerParams::default();
        let levels: Vec<_> = (0..3000).map(|i| alarm_level(i as f64 * 0.1, &p)).collect();
        assert!(levels.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn presets_are_ordered_by_skill() {
        let e = OperatorProfile::preset(Skill::Expert);
        let i = OperatorProfile::preset(Skill::Intermediate);
        let n = OperatorProfile::preset(Skill::Novice);
        assert!(e.noise_sigma <= i.noise_sigma && i.noise_sigma <= n.noise_sigma);
        assert!(e.reaction_delay <= i.reaction_delay && i.reaction_delay <= n.reaction_delay);
        for p in [e, i, n] {
            p.validate().unwrap();
        }
    }

    #[test]
    fn no_error_no_noise_no_lateral_push() {
        let profile = OperatorProfile {
            noise_sigma: 0.0,
            ..OperatorProfile::preset(Skill::Novice)
        };
        let state = PlantState {
            dx: 0.2,
            dy: -0.1,
            ..PlantState::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = operator_wrench(
            &profile,
            &mut ReactionState::default(),
            &state,
            [0.2, -0.1],
            &FWD,
            AlarmLevel::None,
            SafetyMode::Active,
            0.0,
            &mut rng,
        );
        assert_eq!(out.wrench.0[0], 0.0);
        assert_eq!(out.wrench.0[1], 0.0);
        assert_eq!(out.wrench.0[2], profile.advance_force);
    }

    #[test]
    fn same_seed_same_wrench() {
        let profile = OperatorProfile::preset(Skill::Novice);
        let state = PlantState::default();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|k| {
                    operator_wrench(
                        &profile,
                        &mut ReactionState::default(),
                        &state,
                        [0.3, 0.0],
                        &FWD,
                        AlarmLevel::None,
                        SafetyMode::Passive,
                        k as f64 * 1e-3,
                        &mut rng,
                    )
                    .wrench
                    .0
                    .map(f64::to_bits)
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn passive_correction_pulls_back_after_delay() {
        let profile = OperatorProfile {
            noise_sigma: 0.0,
            reaction_delay: 0.5,
            ..OperatorProfile::preset(Skill::Novice)
        };
        let state = PlantState {
            dx: 0.6,
            ..PlantState::default()
        };
        let demand = [0.6, 0.0];
        let mut reaction = ReactionState::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut first = None;
        for k in 0..1000 {
            let t = k as f64 * 1e-3;
            let out = operator_wrench(
                &profile,
                &mut reaction,
                &state,
                demand,
                &FWD,
                AlarmLevel::High,
                SafetyMode::Passive,
                t,
                &mut rng,
            );
            if out.wrench.0[0] < 0.0 {
                first.get_or_insert(t);
            }
        }
        let first = first.expect("correction never applied");
        assert!(first > 0.5 && first < 0.502);
    }

    #[test]
    fn active_mode_never_corrects() {
        let profile = OperatorProfile {
            noise_sigma: 0.0,
            reaction_delay: 0.0,
            ..OperatorProfile::preset(Skill::Expert)
        };
        let state = PlantState {
            dx: 0.6,
            ..PlantState::default()
        };
        let mut reaction = ReactionState::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for k in 0..100 {
            let out = operator_wrench(
                &profile,
                &mut reaction,
                &state,
                [0.6, 0.0],
                &FWD,
                AlarmLevel::High,
                SafetyMode::Active,
                k as f64 * 1e-3,
                &mut rng,
            );
            assert_eq!(out.wrench.0[0], 0.0);
            assert!(out.reaction.is_none());
        }
    }

    #[test]
    fn reaction_resets_when_alarm_drops_before_delay() {
        let mut r = ReactionState::default();
        assert_eq!(r.observe(AlarmLevel::Mid, 0.0, 0.3), None);
        assert_eq!(r.observe(AlarmLevel::Low, 0.2, 0.3), None);
        assert_eq!(r.mid_since, None);
        assert_eq!(r.observe(AlarmLevel::Mid, 0.25, 0.3), None);
        assert_eq!(r.observe(AlarmLevel::Mid, 0.5, 0.3), None);
        assert_eq!(r.observe(AlarmLevel::High, 0.56, 0.3), Some(ReactionChange::Started));
        // Correction persists through LOW and stops only when silent.
        assert_eq!(r.observe(AlarmLevel::Low, 0.6, 0.3), None);
        assert_eq!(r.observe(AlarmLevel::None, 0.7, 0.3), Some(ReactionChange::Stopped));
        assert_eq!(r, ReactionState::default());
    }

    #[test]
    fn permutations_are_all_distinct() {
        let mut seen: Vec<_> = (0..24).map(|i| VesselOrder::nth(i).0).collect();
        assert_eq!(VesselOrder::nth(0).0, [0, 1, 2, 3]);
        assert_eq!(VesselOrder::nth(23).0, [3, 2, 1, 0]);
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 24);
        let from_seeds: std::collections::HashSet<_> = (1000..1024).map(|s| VesselOrder::from_seed(s).0).collect();
        assert_eq!(from_seeds.len(), 24);
    }

    #[test]
    fn demand_is_zero_at_vessel_ends_and_peaks_mid_vessel() {
        let v = VesselProfile::default();
        let order = VesselOrder::nth(0);
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let d = v.demand(p, &order);
            assert!(d[0].hypot(d[1]) < 1e-12, "p={p}");
        }
        let d = v.demand(0.125, &order);
        assert!((d[0] - 0.75).abs() < 1e-12 && d[1].abs() < 1e-12);
        assert_eq!(VesselProfile::flat().demand(0.4, &order), [0.0, 0.0]);
    }
}
