use std::path::PathBuf;

use thiserror::Error;

use crate::sim::TrialLog;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("reference evaluated at t = {t} before its start t0 = {t0}")]
    BeforeReferenceStart { t: f64, t0: f64 },

    #[error("malformed supervisor state: {0}")]
    MalformedState(&'static str),

    #[error("simulation diverged at t = {t}: `{variable}` is not finite")]
    Diverged {
        t: f64,
        variable: &'static str,
        log: Box<TrialLog>,
    },

    #[error("trial log is empty")]
    EmptyLog,

    #[error("trial log samples are not strictly increasing in time (index {0})")]
    UnsortedLog(usize),

    #[error("nothing to aggregate")]
    EmptyBatch,

    #[error("trial {index} failed: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("cannot read scenario `{path}`: {source}")]
    ScenarioRead {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse scenario: {0}")]
    ScenarioParse(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the closed loop itself, as opposed to bad input.
    pub fn is_simulation_failure(&self) -> bool {
        match self {
            Error::Diverged { .. } => true,
            Error::Trial { source, .. } => source.is_simulation_failure(),
            _ => false,
        }
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {value}")))
    }
}

pub(crate) fn ensure_step(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveStep(dt))
    }
}
