//! Human-editable TOML scenario files.
//!
//! Every key is optional; anything missing falls back to the default
//! scenario. The `[profile]` table starts from the preset named by `skill`
//! and overrides individual knobs.
//!
//! ```toml
//! seed = 42
//! timeout = 90.0
//!
//! [controller]
//! a = 1.0
//! switch_on = 100.0
//!
//! [profile]
//! skill = "novice"
//! reaction_delay = 0.9
//!
//! [vessels]
//! amplitude = 0.8
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::ControllerParams;
use crate::error::{Error, Result};
use crate::model::{PlantConfig, ScleraModel};
use crate::operator::{OperatorProfile, SafetyMode, Skill, VesselProfile};
use crate::sim::ScenarioConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSpec {
    pub skill: Option<Skill>,
    pub task_gain: Option<f64>,
    pub noise_sigma: Option<f64>,
    pub reaction_delay: Option<f64>,
    pub correction_gain: Option<f64>,
    pub advance_force: Option<f64>,
}

impl ProfileSpec {
    pub fn resolve(&self, skill_override: Option<Skill>) -> OperatorProfile {
        let skill = skill_override.or(self.skill).unwrap_or(Skill::Intermediate);
        let base = OperatorProfile::preset(skill);
        OperatorProfile {
            skill,
            task_gain: self.task_gain.unwrap_or(base.task_gain),
            noise_sigma: self.noise_sigma.unwrap_or(base.noise_sigma),
            reaction_delay: self.reaction_delay.unwrap_or(base.reaction_delay),
            correction_gain: self.correction_gain.unwrap_or(base.correction_gain),
            advance_force: self.advance_force.unwrap_or(base.advance_force),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub mode: Option<SafetyMode>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub timeout: Option<f64>,
    pub controller: ControllerParams,
    pub sclera: ScleraModel,
    pub plant: PlantConfig,
    pub vessels: VesselProfile,
    pub profile: ProfileSpec,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<SafetyMode>,
    pub skill: Option<Skill>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::ScenarioRead {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn resolve(&self, overrides: Overrides) -> Result<ScenarioConfig> {
        let defaults = ScenarioConfig::default();
        let config = ScenarioConfig {
            mode: overrides.mode.or(self.mode).unwrap_or(defaults.mode),
            controller: self.controller,
            sclera: self.sclera,
            plant: self.plant,
            profile: self.profile.resolve(overrides.skill),
            vessels: self.vessels,
            dt: overrides.dt.or(self.dt).unwrap_or(defaults.dt),
            timeout: self.timeout.unwrap_or(defaults.timeout),
            seed: overrides.seed.or(self.seed).unwrap_or(defaults.seed),
        };
        config.validate()?;
        Ok(config)
    }
}
