//! Closed-loop simulator for sclera-force safety in cooperative eye surgery.
//!
//! A velocity-controlled robot shares a surgical tool with a simulated
//! operator. The sclera is a linear spring at the sclerotomy. Two safety
//! schemes are compared on matched, seeded trials:
//!
//! * **active**: a supervisor switches the lateral channels from impedance
//!   control to adaptive force control whenever the sclera force reaches the
//!   switch-on threshold, and drives the force down along a decaying
//!   reference;
//! * **passive**: the robot stays in impedance control and the operator
//!   reacts, after a delay, to a three-level audio alarm.
//!
//! [`sim::run_trial`] runs one trial, [`metrics::compute_metrics`] reduces
//! its log to safety statistics and [`metrics::aggregate`] summarises a
//! batch.

pub mod cli;
pub mod control;
pub mod error;
pub mod export;
pub mod metrics;
pub mod model;
pub mod operator;
pub mod oracle;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
