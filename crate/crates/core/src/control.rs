//! Control laws and the switching supervisor.
//!
//! Three laws drive the commanded twist:
//!
//! * impedance (co-manipulation): every channel is `k_gain · F_h[i]`;
//! * adaptive force control on the two lateral channels:
//!   `v = λ̂·Ḟ_d − α·ΔF` with `dλ̂/dt = −Λ·Ḟ_d·ΔF`, where
//!   `ΔF = F_measured − F_desired`;
//! * a decaying reference `F_d(t) = f0/2 · (e^{−a(t−t0)} + 1)` snapshotted
//!   from the sclera force at switch-on.
//!
//! The supervisor runs impedance until the sclera force magnitude reaches the
//! switch-on threshold, then runs the adaptive law on channels 1–2 (the other
//! four stay on impedance) until both lateral components have shrunk to 3/4
//! of their snapshot. Compliance estimates persist across switches.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, ensure_step, Error, Result};
use crate::model::{ScleraForce, Twist6, TwistLimits, Wrench6};

/// How the two lateral exit conditions combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExitRule {
    /// Both components at or below 3/4 of their snapshot.
    #[default]
    All,
    /// Either component.
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerParams {
    /// Diagonal of the impedance gain matrix.
    pub k_gain: f64,
    /// Force-error gains α for the x and y channels, mm/s per mN.
    pub alpha: [f64; 2],
    /// Adaptation gains Λ for the x and y channels.
    pub lambda_rate: [f64; 2],
    /// Reference decay rate, 1/s.
    pub a: f64,
    /// Adaptive switch-on threshold L, mN.
    pub switch_on: f64,
    /// Alarm thresholds L1 < L2 < L3, mN. L3 is also the unsafe bound.
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// Initial compliance estimate λ̂(0), mm/mN.
    pub initial_compliance: f64,
    /// Minimum time in adaptive mode before the exit rule is checked, s.
    pub min_dwell: f64,
    pub exit_rule: ExitRule,
    /// Snapshot components smaller than this (mN) count as already satisfied.
    pub small_component: f64,
    /// Skip the L1 < L2 <= L < L3 ordering check.
    pub allow_threshold_override: bool,
    pub limits: TwistLimits,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            k_gain: 7.5,
            alpha: [0.2, 0.2],
            lambda_rate: [5e-6, 5e-6],
            a: 1.0,
            switch_on: 100.0,
            l1: 80.0,
            l2: 100.0,
            l3: 120.0,
            initial_compliance: 1.0 / 100.0,
            min_dwell: 0.05,
            exit_rule: ExitRule::All,
            small_component: 1.0,
            allow_threshold_override: false,
            limits: TwistLimits::default(),
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("controller.k_gain", self.k_gain)?;
        for (name, v) in [
            ("controller.alpha", self.alpha[0]),
            ("controller.alpha", self.alpha[1]),
            ("controller.lambda_rate", self.lambda_rate[0]),
            ("controller.lambda_rate", self.lambda_rate[1]),
            ("controller.a", self.a),
            ("controller.switch_on", self.switch_on),
            ("controller.l1", self.l1),
            ("controller.l2", self.l2),
            ("controller.l3", self.l3),
        ] {
            ensure_positive(name, v)?;
        }
        ensure_non_negative("controller.min_dwell", self.min_dwell)?;
        ensure_non_negative("controller.small_component", self.small_component)?;
        if !self.initial_compliance.is_finite() {
            return Err(Error::invalid("controller.initial_compliance", "must be finite"));
        }
        self.limits.validate()?;
        if !(self.l1 < self.l2 && self.l2 < self.l3) {
            return Err(Error::invalid(
                "controller.l1/l2/l3",
                format!("alarm thresholds must increase, got {}/{}/{}", self.l1, self.l2, self.l3),
            ));
        }
        if !self.allow_threshold_override && !(self.l2 <= self.switch_on && self.switch_on < self.l3) {
            return Err(Error::invalid(
                "controller.switch_on",
                format!(
                    "expected l2 <= switch_on < l3 ({} <= {} < {}); set allow_threshold_override to bypass",
                    self.l2, self.switch_on, self.l3
                ),
            ));
        }
        Ok(())
    }
}

/// Co-manipulation law: every channel proportional to the hand wrench.
pub fn impedance_law(params: &ControllerParams, hand: &Wrench6) -> Twist6 {
    Twist6(hand.0.map(|f| params.k_gain * f)).saturate(&params.limits)
}

/// Decaying force reference snapshotted at switch-on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTrajectory {
    pub f0: [f64; 2],
    pub t0: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    /// F_d, mN
    pub force: [f64; 2],
    /// dF_d/dt, mN/s
    pub rate: [f64; 2],
}

impl ReferenceTrajectory {
    pub fn new(snapshot: ScleraForce, t0: f64, a: f64) -> Self {
        Self {
            f0: snapshot.components(),
            t0,
            a,
        }
    }

    pub fn eval(&self, t: f64) -> Result<ReferenceSample> {
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
        if !(t >= self.t0) {
            return Err(Error::BeforeReferenceStart { t, t0: self.t0 });
        }
        let decay = (-self.a * (t - self.t0)).exp();
        Ok(ReferenceSample {
            force: self.f0.map(|f0| 0.5 * f0 * (decay + 1.0)),
            rate: self.f0.map(|f0| -0.5 * self.a * f0 * decay),
        })
    }
}

/// One lateral channel of the adaptive law: `λ̂·Ḟ_d − α·ΔF`.
pub fn adaptive_channel(lambda_hat: f64, f_d_dot: f64, delta_f: f64, alpha: f64) -> f64 {
    lambda_hat * f_d_dot - alpha * delta_f
}

/// Online estimate of the environment compliance per lateral channel, mm/mN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplianceEstimate {
    pub lambda_hat: [f64; 2],
}

impl ComplianceEstimate {
    pub fn uniform(lambda: f64) -> Self {
        Self {
            lambda_hat: [lambda, lambda],
        }
    }

    /// Explicit-Euler step of `dλ̂/dt = −Λ·Ḟ_d·ΔF`.
    pub fn update(
        &self,
        f_d_dot: [f64; 2],
        delta_f: [f64; 2],
        rates: [f64; 2],
        dt: f64,
    ) -> Result<Self> {
        ensure_step(dt)?;
        let mut lambda_hat = self.lambda_hat;
        for i in 0..2 {
            lambda_hat[i] -= rates[i] * f_d_dot[i] * delta_f[i] * dt;
        }
        Ok(Self { lambda_hat })
    }
}

pub fn update_compliance(
    est: &ComplianceEstimate,
    f_d_dot: [f64; 2],
    delta_f: [f64; 2],
    lambda_rates: [f64; 2],
    dt: f64,
) -> Result<ComplianceEstimate> {
    est.update(f_d_dot, delta_f, lambda_rates, dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ControlMode {
    #[default]
    Impedance,
    Adaptive,
}

impl ControlMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlMode::Impedance => "IMPEDANCE",
            ControlMode::Adaptive => "ADAPTIVE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupervisorState {
    pub mode: ControlMode,
    /// Present iff `mode` is adaptive.
    pub reference: Option<ReferenceTrajectory>,
    pub compliance: ComplianceEstimate,
}

impl SupervisorState {
    pub fn new(initial_compliance: f64) -> Self {
        Self {
            mode: ControlMode::Impedance,
            reference: None,
            compliance: ComplianceEstimate::uniform(initial_compliance),
        }
    }

    fn check(&self) -> Result<()> {
        match (self.mode, self.reference.is_some()) {
            (ControlMode::Adaptive, false) => Err(Error::MalformedState("adaptive mode without a reference")),
            (ControlMode::Impedance, true) => Err(Error::MalformedState("impedance mode with a stale reference")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transition {
    SwitchOn,
    SwitchOff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupervisorOutput {
    pub twist: Twist6,
    pub state: SupervisorState,
    pub transition: Option<Transition>,
}

fn exit_satisfied(params: &ControllerParams, reference: &ReferenceTrajectory, sclera: &ScleraForce) -> bool {
    let measured = sclera.components();
    let shrunk = |i: usize| {
        let f0 = reference.f0[i].abs();
        f0 < params.small_component || measured[i].abs() <= 0.75 * f0
    };
    match params.exit_rule {
        ExitRule::All => shrunk(0) && shrunk(1),
        ExitRule::Any => shrunk(0) || shrunk(1),
    }
}

fn adaptive_step(
    state: &SupervisorState,
    reference: ReferenceTrajectory,
    params: &ControllerParams,
    hand: &Wrench6,
    sclera: &ScleraForce,
    t: f64,
    dt: f64,
) -> Result<(Twist6, SupervisorState)> {
    let desired = reference.eval(t)?;
    let measured = sclera.components();
    let delta_f = [measured[0] - desired.force[0], measured[1] - desired.force[1]];
    let lambda_hat = state.compliance.lambda_hat;

    let mut twist = impedance_law(params, hand).0;
    for i in 0..2 {
        twist[i] = adaptive_channel(lambda_hat[i], desired.rate[i], delta_f[i], params.alpha[i]);
    }
    let compliance = state
        .compliance
        .update(desired.rate, delta_f, params.lambda_rate, dt)?;
    Ok((
        Twist6(twist).saturate(&params.limits),
        SupervisorState {
            mode: ControlMode::Adaptive,
            reference: Some(reference),
            compliance,
        },
    ))
}

/// Decide the control law for this step and emit its twist.
pub fn supervisor_step(
    state: &SupervisorState,
    params: &ControllerParams,
    hand: &Wrench6,
    sclera: &ScleraForce,
    t: f64,
    dt: f64,
) -> Result<SupervisorOutput> {
    ensure_step(dt)?;
    state.check()?;
    match (state.mode, state.reference) {
        (ControlMode::Impedance, _) => {
            if sclera.magnitude() < params.switch_on {
                return Ok(SupervisorOutput {
                    twist: impedance_law(params, hand),
                    state: *state,
                    transition: None,
                });
            }
            let reference = ReferenceTrajectory::new(*sclera, t, params.a);
            let (twist, next) = adaptive_step(state, reference, params, hand, sclera, t, dt)?;
            Ok(SupervisorOutput {
                twist,
                state: next,
                transition: Some(Transition::SwitchOn),
            })
        }
        (ControlMode::Adaptive, Some(reference)) => {
            if t - reference.t0 >= params.min_dwell && exit_satisfied(params, &reference, sclera) {
                return Ok(SupervisorOutput {
                    twist: impedance_law(params, hand),
                    state: SupervisorState {
                        mode: ControlMode::Impedance,
                        reference: None,
                        compliance: state.compliance,
                    },
                    transition: Some(Transition::SwitchOff),
                });
            }
            let (twist, next) = adaptive_step(state, reference, params, hand, sclera, t, dt)?;
            Ok(SupervisorOutput {
                twist,
                state: next,
                transition: None,
            })
        }
        (ControlMode::Adaptive, None) => unreachable!("checked above"),
    }
}

/// Single-axis robot pressing on a spring, used to check the adaptive loop
/// in isolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneDofPlant {
    /// kg; the velocity-level loop never uses it.
    pub mass: f64,
    /// mN/mm
    pub k: f64,
    /// mm
    pub x: f64,
    /// mm
    pub x0: f64,
}

impl OneDofPlant {
    /// Plant positioned so that the contact force equals `force`.
    pub fn with_force(k: f64, force: f64) -> Self {
        Self {
            mass: 1.0,
            k,
            x: force / k,
            x0: 0.0,
        }
    }

    pub fn force(&self) -> f64 {
        self.k * (self.x - self.x0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneDofGains {
    pub alpha: f64,
    pub lambda_rate: f64,
    pub initial_compliance: f64,
}

impl From<&ControllerParams> for OneDofGains {
    fn from(p: &ControllerParams) -> Self {
        Self {
            alpha: p.alpha[0],
            lambda_rate: p.lambda_rate[0],
            initial_compliance: p.initial_compliance,
        }
    }
}

/// Desired-force signal for the single-axis loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OneDofReference {
    Constant(f64),
    /// Decaying reference starting from `f0` at t = 0.
    Decaying { f0: f64, a: f64 },
}

impl OneDofReference {
    fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            OneDofReference::Constant(f) => (f, 0.0),
            OneDofReference::Decaying { f0, a } => {
                let e = (-a * t).exp();
                (0.5 * f0 * (e + 1.0), -0.5 * a * f0 * e)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OneDofTrace {
    pub t: Vec<f64>,
    /// F_e − F_d at each sample.
    pub delta_f: Vec<f64>,
    pub lambda_hat: Vec<f64>,
}

impl OneDofTrace {
    pub fn final_abs_error(&self) -> f64 {
        self.delta_f.last().map_or(0.0, |d| d.abs())
    }

    /// ΔF at time `t` (nearest sample at or after `t`).
    pub fn error_at(&self, t: f64) -> Option<f64> {
        let idx = self.t.partition_point(|&s| s < t - 1e-12);
        self.delta_f.get(idx).copied()
    }
}

/// Closed single-axis loop: adaptive law, ideal velocity plant, linear spring.
///
/// Samples are taken at `k·dt` for `k = 0..=round(duration/dt)`.
pub fn run_1dof(
    plant: &OneDofPlant,
    reference: OneDofReference,
    gains: OneDofGains,
    duration: f64,
    dt: f64,
) -> Result<OneDofTrace> {
    ensure_step(dt)?;
    ensure_positive("plant.k", plant.k)?;
    ensure_non_negative("duration", duration)?;
    let steps = (duration / dt).round() as usize;
    let mut trace = OneDofTrace {
        t: Vec::with_capacity(steps + 1),
        delta_f: Vec::with_capacity(steps + 1),
        lambda_hat: Vec::with_capacity(steps + 1),
    };
    let mut x = plant.x;
    let mut lambda_hat = gains.initial_compliance;
    for n in 0..=steps {
        let t = n as f64 * dt;
        let (f_d, f_d_dot) = reference.eval(t);
        let delta_f = plant.k * (x - plant.x0) - f_d;
        trace.t.push(t);
        trace.delta_f.push(delta_f);
        trace.lambda_hat.push(lambda_hat);
        if n == steps {
            break;
        }
        let v = adaptive_channel(lambda_hat, f_d_dot, delta_f, gains.alpha);
        lambda_hat -= gains.lambda_rate * f_d_dot * delta_f * dt;
        x += v * dt;
    }
    Ok(trace)
}

/// Constant-reference convergence run.
pub fn run_1dof_oracle(
    plant: &OneDofPlant,
    f_d: f64,
    params: &ControllerParams,
    duration: f64,
    dt: f64,
) -> Result<OneDofTrace> {
    run_1dof(plant, OneDofReference::Constant(f_d), params.into(), duration, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DT: f64 = 0.001;

    fn hand(v: [f64; 6]) -> Wrench6 {
        Wrench6(v)
    }

    #[test]
    fn default_params_validate() {
        ControllerParams::default().validate().unwrap();
    }

    #[test]
    fn threshold_ordering_is_enforced() {
        let p = ControllerParams {
            switch_on: 130.0,
            ..ControllerParams::default()
        };
        assert!(p.validate().is_err());
        let p = ControllerParams {
            allow_threshold_override: true,
            ..p
        };
        p.validate().unwrap();
        let p = ControllerParams {
            l1: 110.0,
            ..ControllerParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn impedance_examples() {
        let p = ControllerParams::default();
        assert_eq!(
            impedance_law(&p, &hand([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])).0,
            [7.5, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(impedance_law(&p, &Wrench6::default()).0, [0.0; 6]);
        let wide = ControllerParams {
            limits: TwistLimits {
                linear: 100.0,
                angular: 100.0,
            },
            ..p
        };
        assert_eq!(
            impedance_law(&wide, &hand([2.0, -1.0, 0.5, 0.0, 0.0, 0.0])).0,
            [15.0, -7.5, 3.75, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn reference_examples() {
        let r = ReferenceTrajectory {
            f0: [110.0, -40.0],
            t0: 2.0,
            a: 1.0,
        };
        let s = r.eval(2.0).unwrap();
        assert_eq!(s.force, [110.0, -40.0]);
        assert_eq!(s.rate, [-55.0, 20.0]);

        let s = r.eval(2.0 + std::f64::consts::LN_2).unwrap();
        assert!((s.force[0] - 82.5).abs() <= 1e-9 * 82.5);

        let s = r.eval(2.0 + 800.0).unwrap();
        assert_eq!(s.force, [55.0, -20.0]);
        assert_eq!(s.rate[0].abs(), 0.0);

        assert!(matches!(r.eval(1.999), Err(Error::BeforeReferenceStart { .. })));
    }

    #[test]
    fn adaptive_channel_examples() {
        assert!((adaptive_channel(0.01, 0.0, 10.0, 0.2) + 2.0).abs() < 1e-15);
        assert!((adaptive_channel(0.01, -5.0, 0.0, 0.2) + 0.05).abs() < 1e-15);
        assert!((adaptive_channel(0.005, -55.0, 3.0, 0.2) + 0.875).abs() < 1e-15);
    }

    #[test]
    fn compliance_update_examples() {
        let est = ComplianceEstimate::uniform(0.01);
        let same = est.update([0.0, 0.0], [4.0, -3.0], [5e-6; 2], DT).unwrap();
        assert_eq!(same, est);

        let one = est.update([-10.0, 0.0], [4.0, 0.0], [5e-6; 2], DT).unwrap();
        // 5e-6 · 10 · 4 · 1e-3
        assert!((one.lambda_hat[0] - 0.01 - 2e-7).abs() < 1e-17);

        let mut e = ComplianceEstimate::uniform(0.0);
        for _ in 0..1000 {
            e = e.update([-1.0, -1.0], [1.0, 1.0], [5e-6; 2], DT).unwrap();
        }
        assert!((e.lambda_hat[0] - 5e-6).abs() < 1e-15);

        assert!(matches!(
            est.update([1.0; 2], [1.0; 2], [1.0; 2], 0.0),
            Err(Error::NonPositiveStep(_))
        ));
    }

    #[test]
    fn stays_in_impedance_below_threshold() {
        let p = ControllerParams::default();
        let s = SupervisorState::new(0.01);
        let out = supervisor_step(&s, &p, &hand([0.1; 6]), &ScleraForce::new(99.0, 0.0), 1.0, DT).unwrap();
        assert_eq!(out.state.mode, ControlMode::Impedance);
        assert_eq!(out.transition, None);
        assert_eq!(out.twist, impedance_law(&p, &hand([0.1; 6])));
    }

    #[test]
    fn switches_on_at_threshold_and_snapshots() {
        let p = ControllerParams::default();
        let s = SupervisorState::new(0.01);
        let h = hand([0.3, -0.2, 0.05, 0.01, 0.0, -0.02]);
        let out = supervisor_step(&s, &p, &h, &ScleraForce::new(60.0, 80.0), 3.0, DT).unwrap();
        assert_eq!(out.transition, Some(Transition::SwitchOn));
        assert_eq!(out.state.mode, ControlMode::Adaptive);
        let r = out.state.reference.unwrap();
        assert_eq!((r.f0, r.t0, r.a), ([60.0, 80.0], 3.0, 1.0));
        // ΔF = 0 at t0, so the lateral command is pure feed-forward.
        assert!((out.twist.0[0] - 0.01 * -30.0).abs() < 1e-15);
        assert!((out.twist.0[1] - 0.01 * -40.0).abs() < 1e-15);
        let imp = impedance_law(&p, &h);
        assert_eq!(out.twist.0[2..], imp.0[2..]);
    }

    fn adaptive_state(f0: [f64; 2], t0: f64) -> SupervisorState {
        SupervisorState {
            mode: ControlMode::Adaptive,
            reference: Some(ReferenceTrajectory { f0, t0, a: 1.0 }),
            compliance: ComplianceEstimate::uniform(0.01),
        }
    }

    #[test]
    fn switches_back_on_componentwise_three_quarters() {
        let p = ControllerParams::default();
        let s = adaptive_state([60.0, 80.0], 0.0);
        let out = supervisor_step(&s, &p, &Wrench6::default(), &ScleraForce::new(44.0, 59.0), 1.0, DT).unwrap();
        assert_eq!(out.transition, Some(Transition::SwitchOff));
        assert_eq!(out.state.mode, ControlMode::Impedance);
        assert_eq!(out.state.reference, None);
        assert_eq!(out.state.compliance, s.compliance);

        // y still above 60: stays adaptive under the AND rule...
        let out = supervisor_step(&s, &p, &Wrench6::default(), &ScleraForce::new(44.0, 61.0), 1.0, DT).unwrap();
        assert_eq!(out.state.mode, ControlMode::Adaptive);
        // ...but exits under OR.
        let any = ControllerParams {
            exit_rule: ExitRule::Any,
            ..p
        };
        let out = supervisor_step(&s, &any, &Wrench6::default(), &ScleraForce::new(44.0, 61.0), 1.0, DT).unwrap();
        assert_eq!(out.state.mode, ControlMode::Impedance);
    }

    #[test]
    fn tiny_snapshot_component_does_not_trap() {
        let p = ControllerParams::default();
        let s = adaptive_state([0.5, 110.0], 0.0);
        let out = supervisor_step(&s, &p, &Wrench6::default(), &ScleraForce::new(0.8, 80.0), 1.0, DT).unwrap();
        assert_eq!(out.transition, Some(Transition::SwitchOff));
    }

    #[test]
    fn dwell_delays_exit() {
        let p = ControllerParams::default();
        let s = adaptive_state([60.0, 80.0], 1.0);
        let out = supervisor_step(&s, &p, &Wrench6::default(), &ScleraForce::new(10.0, 10.0), 1.02, DT).unwrap();
        assert_eq!(out.state.mode, ControlMode::Adaptive);
        let out = supervisor_step(&s, &p, &Wrench6::default(), &ScleraForce::new(10.0, 10.0), 1.05, DT).unwrap();
        assert_eq!(out.state.mode, ControlMode::Impedance);
    }

    #[test]
    fn rejects_malformed_state() {
        let p = ControllerParams::default();
        let bad = SupervisorState {
            mode: ControlMode::Adaptive,
            reference: None,
            compliance: ComplianceEstimate::uniform(0.01),
        };
        assert!(matches!(
            supervisor_step(&bad, &p, &Wrench6::default(), &ScleraForce::default(), 0.0, DT),
            Err(Error::MalformedState(_))
        ));
    }

    #[test]
    fn adaptive_step_updates_compliance_by_formula() {
        let p = ControllerParams::default();
        let s = adaptive_state([100.0, 20.0], 0.0);
        let t = 0.3;
        let sclera = ScleraForce::new(90.0, 19.0);
        let out = supervisor_step(&s, &p, &Wrench6::default(), &sclera, t, DT).unwrap();
        let d = s.reference.unwrap().eval(t).unwrap();
        for i in 0..2 {
            let df = sclera.components()[i] - d.force[i];
            let expected = 0.01 - p.lambda_rate[i] * d.rate[i] * df * DT;
            assert_eq!(out.state.compliance.lambda_hat[i], expected);
            assert_eq!(out.twist.0[i], adaptive_channel(0.01, d.rate[i], df, p.alpha[i]));
        }
    }

    #[test]
    fn one_dof_equilibrium_stays_put() {
        let p = ControllerParams::default();
        let plant = OneDofPlant::with_force(200.0, 50.0);
        let tr = run_1dof_oracle(&plant, 50.0, &p, 2.0, DT).unwrap();
        assert!(tr.delta_f.iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn one_dof_constant_reference_keeps_lambda() {
        let p = ControllerParams {
            initial_compliance: 0.037,
            ..ControllerParams::default()
        };
        let plant = OneDofPlant::with_force(300.0, 120.0);
        let tr = run_1dof_oracle(&plant, 40.0, &p, 3.0, DT).unwrap();
        assert!(tr.lambda_hat.iter().all(|&l| l == 0.037));
    }

    #[test]
    fn one_dof_decays_below_half_millinewton() {
        let p = ControllerParams::default();
        let plant = OneDofPlant::with_force(200.0, 100.0);
        let tr = run_1dof_oracle(&plant, 50.0, &p, 5.0, DT).unwrap();
        assert!(tr.final_abs_error() < 0.5);
        assert!(tr.delta_f.windows(2).all(|w| w[1].abs() <= w[0].abs()));
    }

    #[test]
    fn one_dof_rejects_bad_step() {
        let p = ControllerParams::default();
        let plant = OneDofPlant::with_force(200.0, 100.0);
        assert!(run_1dof_oracle(&plant, 50.0, &p, 1.0, 0.0).is_err());
    }

    #[test]
    fn one_dof_tracks_decaying_reference() {
        let p = ControllerParams::default();
        let plant = OneDofPlant::with_force(200.0, 110.0);
        let tr = run_1dof(
            &plant,
            OneDofReference::Decaying { f0: 110.0, a: 1.0 },
            (&p).into(),
            5.0,
            DT,
        )
        .unwrap();
        // Tracking lag is bounded by |k·λ̂ − 1|·max|Ḟ_d| / (k·α).
        let bound = (200.0 * 0.01 - 1.0f64).abs() * 55.0 / (200.0 * 0.2);
        assert!(tr.delta_f.iter().all(|d| d.abs() <= bound + 1e-9));
        assert!(tr.final_abs_error() < 0.1);
    }

    proptest! {
        #[test]
        fn reference_is_monotone_and_never_crosses_zero(
            f0x in prop_oneof![-300.0f64..-1.0, 1.0f64..300.0],
            f0y in prop_oneof![-300.0f64..-1.0, 1.0f64..300.0],
            a in 0.05f64..5.0,
            t0 in 0.0f64..100.0,
        ) {
            let r = ReferenceTrajectory { f0: [f0x, f0y], t0, a };
            let mut prev = r.eval(t0).unwrap().force;
            for n in 1..200 {
                let t = t0 + n as f64 * 0.02;
                let cur = r.eval(t).unwrap().force;
                for i in 0..2 {
                    prop_assert!(cur[i].abs() < prev[i].abs());
                    prop_assert!(cur[i].abs() >= r.f0[i].abs() / 2.0);
                    prop_assert_eq!(cur[i].signum(), r.f0[i].signum());
                }
                prev = cur;
            }
        }

        #[test]
        fn angular_and_axial_rows_always_follow_impedance(
            h in proptest::array::uniform6(-0.5f64..0.5),
            fx in -150.0f64..150.0, fy in -150.0f64..150.0,
            adaptive in any::<bool>(),
        ) {
            let p = ControllerParams::default();
            let s = if adaptive { adaptive_state([90.0, -70.0], 0.0) } else { SupervisorState::new(0.01) };
            let out = supervisor_step(&s, &p, &Wrench6(h), &ScleraForce::new(fx, fy), 0.2, DT).unwrap();
            let imp = impedance_law(&p, &Wrench6(h));
            prop_assert_eq!(&out.twist.0[2..], &imp.0[2..]);
            if out.transition == Some(Transition::SwitchOn) {
                prop_assert!(ScleraForce::new(fx, fy).magnitude() >= p.switch_on);
            }
        }
    }
}
