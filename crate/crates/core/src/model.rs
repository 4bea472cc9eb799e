//! Tool-eye physical state.
//!
//! The sclera is two independent linear springs acting on the lateral
//! displacement of the tool shaft at the sclerotomy, expressed in the handle
//! frame. The robot tracks the commanded twist through an ideal velocity
//! loop, optionally softened by a first-order lag on the lateral channels.
//! Axial friction and moments at the sclerotomy are ignored.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, ensure_step, Error, Result};

/// Lateral force exerted by the sclera on the tool shaft, mN.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScleraForce {
    pub fx: f64,
    pub fy: f64,
}

impl ScleraForce {
    pub const fn new(fx: f64, fy: f64) -> Self {
        Self { fx, fy }
    }

    pub fn magnitude(&self) -> f64 {
        self.fx.hypot(self.fy)
    }

    pub fn components(&self) -> [f64; 2] {
        [self.fx, self.fy]
    }
}

/// `sqrt(fx² + fy²)`; the axial component is negligible and never enters.
pub fn force_magnitude(f: ScleraForce) -> f64 {
    f.magnitude()
}

/// Linear-compliance sclera. Stiffness is hidden from the controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScleraModel {
    /// mN/mm
    pub kx: f64,
    /// mN/mm
    pub ky: f64,
    /// mm
    pub rest_x: f64,
    /// mm
    pub rest_y: f64,
}

impl Default for ScleraModel {
    fn default() -> Self {
        Self {
            kx: 200.0,
            ky: 200.0,
            rest_x: 0.0,
            rest_y: 0.0,
        }
    }
}

impl ScleraModel {
    pub fn isotropic(k: f64) -> Result<Self> {
        let model = Self {
            kx: k,
            ky: k,
            ..Self::default()
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("sclera.kx", self.kx)?;
        ensure_positive("sclera.ky", self.ky)?;
        if !self.rest_x.is_finite() || !self.rest_y.is_finite() {
            return Err(Error::invalid("sclera.rest", "rest position must be finite"));
        }
        Ok(())
    }

    /// True compliance `1/k` per channel, mm/mN.
    pub fn compliance(&self) -> [f64; 2] {
        [1.0 / self.kx, 1.0 / self.ky]
    }

    /// Plant state resting at the sclerotomy (zero force).
    pub fn rest_state(&self) -> PlantState {
        PlantState {
            dx: self.rest_x,
            dy: self.rest_y,
            ..PlantState::default()
        }
    }
}

/// Lateral tool displacement, task progress and time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlantState {
    /// mm, handle frame
    pub dx: f64,
    /// mm, handle frame
    pub dy: f64,
    /// Actual lateral velocity, mm/s. Equals the command when the lag is off.
    pub vx: f64,
    pub vy: f64,
    /// Task path parameter in [0, 1].
    pub progress: f64,
    /// s
    pub t: f64,
}

impl PlantState {
    pub fn is_finite(&self) -> bool {
        [self.dx, self.dy, self.vx, self.vy, self.progress, self.t]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Name of the first non-finite field, if any.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        [
            ("dx", self.dx),
            ("dy", self.dy),
            ("vx", self.vx),
            ("vy", self.vy),
            ("progress", self.progress),
            ("t", self.t),
        ]
        .into_iter()
        .find(|(_, v)| !v.is_finite())
        .map(|(name, _)| name)
    }
}

pub fn sclera_force(state: &PlantState, model: &ScleraModel) -> ScleraForce {
    ScleraForce {
        fx: model.kx * (state.dx - model.rest_x),
        fy: model.ky * (state.dy - model.rest_y),
    }
}

/// Operator force/torque at the handle: mN on 0..3, mN·mm on 3..6.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench6(pub [f64; 6]);

/// Commanded end-effector velocity: mm/s on 0..3, rad/s on 3..6.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist6(pub [f64; 6]);

impl Twist6 {
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn saturate(mut self, limits: &TwistLimits) -> Self {
        for (i, v) in self.0.iter_mut().enumerate() {
            let lim = if i < 3 { limits.linear } else { limits.angular };
            *v = v.clamp(-lim, lim);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwistLimits {
    /// mm/s
    pub linear: f64,
    /// rad/s
    pub angular: f64,
}

impl Default for TwistLimits {
    fn default() -> Self {
        Self {
            linear: 10.0,
            angular: 1.0,
        }
    }
}

impl TwistLimits {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("limits.linear", self.linear)?;
        ensure_positive("limits.angular", self.angular)
    }
}

/// Plant-side knobs that are not part of the controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    /// Progress per unit of projected task velocity (per mm along the task
    /// direction when the weights select a linear channel).
    pub progress_rate: f64,
    /// Task direction over twist channels 3..6.
    pub progress_weights: [f64; 4],
    /// Lateral velocity-loop time constant, s. Zero tracks the command exactly.
    pub lag_tau: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            progress_rate: 0.0025,
            progress_weights: [1.0, 0.0, 0.0, 0.0],
            lag_tau: 0.0,
        }
    }
}

impl PlantConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("plant.progress_rate", self.progress_rate)?;
        ensure_non_negative("plant.lag_tau", self.lag_tau)?;
        if self.progress_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("plant.progress_weights", "must be finite"));
        }
        Ok(())
    }

    /// Rate of progress for a twist: the (non-negative) projection of
    /// channels 3..6 onto the task direction, scaled.
    pub fn progress_speed(&self, twist: &Twist6) -> f64 {
        let along: f64 = self
            .progress_weights
            .iter()
            .zip(&twist.0[2..])
            .map(|(w, v)| w * v)
            .sum();
        self.progress_rate * along.max(0.0)
    }
}

/// One explicit-Euler step of the velocity-controlled plant.
pub fn step_plant(
    state: &PlantState,
    twist: &Twist6,
    dt: f64,
    config: &PlantConfig,
) -> Result<PlantState> {
    ensure_step(dt)?;
    if !twist.is_finite() {
        return Err(Error::invalid("twist", "non-finite command"));
    }
    let [cx, cy] = [twist.0[0], twist.0[1]];
    let (vx, vy) = if config.lag_tau > 0.0 {
        let blend = -(-dt / config.lag_tau).exp_m1();
        (
            state.vx + (cx - state.vx) * blend,
            state.vy + (cy - state.vy) * blend,
        )
    } else {
        (cx, cy)
    };
    Ok(PlantState {
        dx: state.dx + vx * dt,
        dy: state.dy + vy * dt,
        vx,
        vy,
        progress: (state.progress + config.progress_speed(twist) * dt).clamp(0.0, 1.0),
        t: state.t + dt,
    })
}
