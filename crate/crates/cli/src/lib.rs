//! Scenario runner for the inequality checkers of `cbmkit-core`.

pub mod fixtures;
pub mod run;
pub mod scenario;

pub use run::{run_text, Entry, Overrides, Report, Summary};
pub use scenario::{Scenario, SchemaError};
