//! Multi-run experiments, comparison tables and plot data.
//!
//! Run `r` of an experiment draws optimizer randomness from stream `r` of
//! the master seed, so runs execute in parallel and still aggregate
//! identically. With `reshuffle-per-run`, run `r` also splits its data with
//! split seed `base + r`.

mod compare;
mod config;
mod experiment;
mod plot;

pub use compare::{compare, Comparison, ComparisonRow};
pub use config::{
    ExperimentConfig, FitnessKind, OptimizerKind, OptimizerParams, FULL_SCALE_ITERATIONS,
    FULL_SCALE_PARTICLES, FULL_SCALE_RUNS,
};
pub use experiment::{
    read_report, records_csv, run_experiment, summary_text, write_outputs, AggregateReport,
    ExperimentOutcome, RunRecord, RunStatus, ARTIFACT_VERSION,
};
pub use plot::{parse_plot_data, plot_rows, write_plot_data, PlotRow};

use thiserror::Error;

use crate::dataset::DataError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("run {run} failed: {message}")]
    Run { run: usize, message: String },
    #[error("no run completed")]
    NoCompletedRuns,
    #[error("cannot compare: {0}")]
    Compare(String),
    #[error("{path}: {message}")]
    Output { path: String, message: String },
}

impl HarnessError {
    /// Process exit code: 1 usage, 2 data, 3 run failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Compare(_) => 1,
            HarnessError::Data(_) => 2,
            HarnessError::Run { .. }
            | HarnessError::NoCompletedRuns
            | HarnessError::Output { .. } => 3,
        }
    }
}
