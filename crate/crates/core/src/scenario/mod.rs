//! Scenario files, the built-in reference networks, the multi-K sweep and
//! its text/CSV reports.

mod curves;
mod presets;
mod report;
mod run;
mod spec;

pub use curves::{emit_curves, write_curves_csv, CurvePoint};
pub use presets::{preset, PRESET_NAMES};
pub use report::{
    emit_report, render_text, write_links_csv, write_summary_csv, write_trace_csv, ReportFormat,
};
pub use run::{run_scenario, ChannelResult, LinkPoint, ScenarioResult};
pub use spec::{load_scenario, GaOverrides, LinkEntry, LinkParams, ScenarioSpec, DEFAULT_TAU};

use thiserror::Error;

use crate::link::ModelError;
use crate::optimizer::OptimizeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("link {0:?} cannot be entangled at any flux")]
    Unentangleable(String),
    #[error("{0:?} is neither a preset nor a readable file")]
    UnknownScenario(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<std::io::Error> for ScenarioError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for ScenarioError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}
