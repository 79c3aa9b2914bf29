//! Scenario configuration, batch runs, outputs and regression checks for the
//! skin-effect quench simulator.

pub mod angle;
pub mod config;
pub mod error;
pub mod presets;
pub mod record;
pub mod runner;
pub mod svg;
pub mod sweep;
pub mod verify;

pub use error::{CliError, Result};
