//! Fixed-step closed-loop trial engine.
//!
//! Each step reads the sclera force, updates the alarm, asks the operator for
//! a hand wrench, turns it into a twist (supervisor in active mode, plain
//! impedance in passive mode) and integrates the plant. One sample is logged
//! per step, describing the state at the end of the step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{impedance_law, supervisor_step, ControlMode, ControllerParams, SupervisorState, Transition};
use crate::error::{ensure_positive, Error, Result};
use crate::model::{sclera_force, step_plant, PlantConfig, ScleraModel, Twist6};
use crate::operator::{
    alarm_level, operator_wrench, AlarmLevel, OperatorProfile, ReactionChange, ReactionState, SafetyMode, Skill,
    VesselOrder, VesselProfile,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: SafetyMode,
    pub controller: ControllerParams,
    pub sclera: ScleraModel,
    pub plant: PlantConfig,
    pub profile: OperatorProfile,
    pub vessels: VesselProfile,
    /// s
    pub dt: f64,
    /// s
    pub timeout: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mode: SafetyMode::Active,
            controller: ControllerParams::default(),
            sclera: ScleraModel::default(),
            plant: PlantConfig::default(),
            profile: OperatorProfile::default(),
            vessels: VesselProfile::default(),
            dt: 0.001,
            timeout: 120.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn new(mode: SafetyMode, skill: Skill, seed: u64) -> Self {
        Self {
            mode,
            profile: OperatorProfile::preset(skill),
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("dt", self.dt)?;
        ensure_positive("timeout", self.timeout)?;
        self.controller.validate()?;
        self.sclera.validate()?;
        self.plant.validate()?;
        self.profile.validate()?;
        self.vessels.validate()
    }

    pub fn with_mode(self, mode: SafetyMode) -> Self {
        Self { mode, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub fsx: f64,
    pub fsy: f64,
    pub fs: f64,
    /// Law that produced this step's twist.
    pub mode: ControlMode,
    pub alarm: AlarmLevel,
    pub progress: f64,
    pub dx: f64,
    pub dy: f64,
    /// Twist applied over the step.
    pub twist: [f64; 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    SwitchOn,
    SwitchOff,
    AlarmChange,
    CorrectionStart,
    CorrectionEnd,
    TaskDone,
    Timeout,
    Abort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    /// Sclera force at the event, mN.
    pub fsx: f64,
    pub fsy: f64,
    pub fs: f64,
    /// New level, for alarm changes.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alarm: Option<AlarmLevel>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub mode: SafetyMode,
    pub skill: Skill,
    pub seed: u64,
    pub dt: f64,
    pub vessel_order: VesselOrder,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
}

impl TrialLog {
    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn completed(&self) -> bool {
        self.events_of(EventKind::TaskDone).next().is_some()
    }

    /// (switch-on, switch-off) pairs; a trailing switch-on closed by the end
    /// of the trial is not included.
    pub fn switch_pairs(&self) -> Vec<(&Event, &Event)> {
        let mut pairs = Vec::new();
        let mut open = None;
        for e in &self.events {
            match e.kind {
                EventKind::SwitchOn => open = Some(e),
                EventKind::SwitchOff => {
                    if let Some(on) = open.take() {
                        pairs.push((on, e));
                    }
                }
                _ => {}
            }
        }
        pairs
    }
}

fn event(t: f64, kind: EventKind, f: &crate::model::ScleraForce) -> Event {
    Event {
        t,
        kind,
        fsx: f.fx,
        fsy: f.fy,
        fs: f.magnitude(),
        alarm: None,
        detail: None,
    }
}

/// Run one trial until the task completes or the timeout elapses.
pub fn run_trial(config: &ScenarioConfig) -> Result<TrialLog> {
    config.validate()?;
    let params = &config.controller;
    let dt = config.dt;
    let max_steps = (config.timeout / dt).round().max(1.0) as usize;
    let order = VesselOrder::from_seed(config.seed);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut plant = config.sclera.rest_state();
    let mut supervisor = SupervisorState::new(params.initial_compliance);
    let mut reaction = ReactionState::default();

    let mut log = TrialLog {
        mode: config.mode,
        skill: config.profile.skill,
        seed: config.seed,
        dt,
        vessel_order: order,
        samples: Vec::with_capacity(max_steps.min(200_000)),
        events: Vec::new(),
    };

    let mut force = sclera_force(&plant, &config.sclera);
    let mut alarm = alarm_level(force.magnitude(), params);

    for _ in 0..max_steps {
        if plant.progress >= 1.0 {
            break;
        }
        let t = plant.t;
        let demand = config.vessels.demand(plant.progress, &order);
        let hand = operator_wrench(
            &config.profile,
            &mut reaction,
            &plant,
            demand,
            &config.plant.progress_weights,
            alarm,
            config.mode,
            t,
            &mut rng,
        );
        match hand.reaction {
            Some(ReactionChange::Started) => log.events.push(event(t, EventKind::CorrectionStart, &force)),
            Some(ReactionChange::Stopped) => log.events.push(event(t, EventKind::CorrectionEnd, &force)),
            None => {}
        }

        let twist: Twist6 = match config.mode {
            SafetyMode::Passive => impedance_law(params, &hand.wrench),
            SafetyMode::Active => {
                let out = supervisor_step(&supervisor, params, &hand.wrench, &force, t, dt)?;
                match out.transition {
                    Some(Transition::SwitchOn) => log.events.push(event(t, EventKind::SwitchOn, &force)),
                    Some(Transition::SwitchOff) => log.events.push(event(t, EventKind::SwitchOff, &force)),
                    None => {}
                }
                supervisor = out.state;
                out.twist
            }
        };

        let bad = if !twist.is_finite() {
            Some("twist")
        } else if supervisor.compliance.lambda_hat.iter().any(|l| !l.is_finite()) {
            Some("lambda_hat")
        } else {
            None
        };
        let next = match bad {
            None => step_plant(&plant, &twist, dt, &config.plant)?,
            Some(_) => plant,
        };
        let overflow = || (!sclera_force(&next, &config.sclera).magnitude().is_finite()).then_some("fs");
        if let Some(variable) = bad.or_else(|| next.first_non_finite()).or_else(overflow) {
            let mut abort = event(t, EventKind::Abort, &force);
            abort.detail = Some(format!("non-finite {variable}"));
            log.events.push(abort);
            return Err(Error::Diverged {
                t,
                variable,
                log: Box::new(log),
            });
        }
        plant = next;

        force = sclera_force(&plant, &config.sclera);
        let fs = force.magnitude();
        let new_alarm = alarm_level(fs, params);
        if new_alarm != alarm {
            let mut e = event(plant.t, EventKind::AlarmChange, &force);
            e.alarm = Some(new_alarm);
            log.events.push(e);
            alarm = new_alarm;
        }
        log.samples.push(Sample {
            t: plant.t,
            fsx: force.fx,
            fsy: force.fy,
            fs,
            mode: supervisor.mode,
            alarm,
            progress: plant.progress,
            dx: plant.dx,
            dy: plant.dy,
            twist: twist.0,
        });
    }

    let end = if plant.progress >= 1.0 {
        EventKind::TaskDone
    } else {
        EventKind::Timeout
    };
    log.events.push(event(plant.t, end, &force));
    Ok(log)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Trial `i` runs with seed `config.seed + i`. Output is ordered by trial
/// index regardless of execution strategy.
pub fn run_batch(config: &ScenarioConfig, n_trials: usize, exec: Execution) -> Result<Vec<TrialLog>> {
    if n_trials == 0 {
        return Err(Error::invalid("n_trials", "must be at least 1"));
    }
    config.validate()?;
    let one = |i: usize| {
        let cfg = config.with_seed(config.seed.wrapping_add(i as u64));
        run_trial(&cfg).map_err(|e| Error::Trial {
            index: i,
            source: Box::new(e),
        })
    };
    match exec {
        Execution::Parallel => (0..n_trials).into_par_iter().map(one).collect(),
        Execution::Sequential => (0..n_trials).map(one).collect(),
    }
}
