//! Experiment harness over the flow laboratory: data factories, scenario
//! runners that turn decay statements into measured exponents and residuals,
//! and deterministic report emission.

pub mod config;
pub mod datum;
pub mod error;
pub mod report;
pub mod scenario;

pub use config::{ExperimentConfig, Scenario};
pub use datum::{make_datum, Datum, DatumKind, DatumSpec};
pub use error::LabError;
pub use report::{write_report, Report, RuleOutcome, RuleStatus};
pub use scenario::run_experiment;
