//! Experiment harness: runs solver trials in parallel, compares them and
//! writes reports.
//!
//! Each experiment produces `report.json`, `comparison.csv` and one trace
//! CSV per run under an output directory. Results are assembled in
//! (solver, trial) order so reports do not depend on thread scheduling.

mod experiment;
pub mod metrics;
mod report;
mod spec;

pub use experiment::{run_experiment, run_on};
pub use metrics::{accuracy, convergence_rank, stability};
pub use report::{
    write_atomic, ComparisonRow, EmergencyRecord, ParetoRecord, PipelineRecord, Report, RotationRecord,
    TableTimingRecord, TimingSummary, TrialRecord,
};
pub use spec::{ExperimentId, ExperimentSpec, RotationSetup};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] msp_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("report serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
