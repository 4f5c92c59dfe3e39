//! Scenario runner and property-suite harness behind the `volmorph` binary.

pub mod config;
pub mod run;

pub use config::{load_scenario, ConfigError, Scenario, ScenarioConfig};
pub use run::{run_orbit, run_properties, run_scenario, run_scenario_into, Exit, RunError};
