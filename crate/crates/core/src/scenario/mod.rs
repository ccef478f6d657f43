//! Config-driven pipelines: source, channel chain, metric and sweep, with
//! reports made of unit-suffixed records and a text summary.

pub mod config;
pub mod report;
pub mod reproduce;
pub mod run;

pub use config::ScenarioConfig;
pub use report::{OutputFormat, Record, Report};
pub use reproduce::{emit_attenuation_curve, reproduce_table1, Table1};
pub use run::run_scenario;
