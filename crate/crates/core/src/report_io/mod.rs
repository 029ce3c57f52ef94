//! Scenario loading and report emission.
//!
//! Inputs are a process sheet CSV (`task,description,resource,cycle_time_sec`),
//! a resources CSV (`resource,available_machines,daily_capacity_sec`) and a
//! scenario JSON with demand, rates and an optional line layout. Reports are
//! rendered as aligned text, CSV or JSON.

mod emit;
mod load;
mod problem_file;

pub use emit::{
    fixed, render_report, write_atomic, Align, Cell, Column, Destination, Format, Report, Table, Value,
};
pub use load::{
    load_bundle, load_scenario, parse_bundle, scenario_to_texts, write_scenario, LoadedScenario, ScenarioFiles,
    ScenarioTexts, PROCESS_SHEET_FILE, RESOURCES_FILE, SCENARIO_FILE,
};
pub use problem_file::{load_problem, parse_problem};

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::line_model::ModelError;
use crate::planning::PlanningError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{file}{}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default(), field.as_ref().map(|f| format!(" [{f}]")).unwrap_or_default())]
    Parse { file: String, line: Option<u64>, field: Option<String>, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Planning(#[from] PlanningError),
    #[error("cannot write scenario: {0}")]
    Unrepresentable(String),
}

impl IoError {
    pub(crate) fn parse(file: &str, line: Option<u64>, field: Option<&str>, message: impl Into<String>) -> Self {
        IoError::Parse { file: file.to_string(), line, field: field.map(str::to_string), message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        IoError::Io { path: path.into(), source }
    }
}

/// Emits `report` in `format` to `destination`.
pub fn emit_report(report: &dyn Report, format: Format, destination: &Destination) -> Result<(), IoError> {
    let text = render_report(report, format);
    match destination {
        Destination::Stdout => {
            use io::Write;
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| IoError::io("<stdout>", e))
        }
        Destination::File(path) => write_atomic(path, text.as_bytes()),
    }
}
