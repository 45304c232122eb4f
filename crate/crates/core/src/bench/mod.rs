//! Sliding-window benchmark over the Lorenz prediction task.

mod config;
mod report;
mod run;

pub use config::{parse_roster, ExperimentConfig, ModelKind, QuantizationConfig};
pub use report::{emit_report, ReportFormat, CSV_HEADER};
pub use run::{
    grid_search, measure_query_time, measure_storage, prepare_splits, run_experiment, run_rng, run_split,
    training_set, ExperimentReport, Fitted, ModelStats, RunOutcome, DELTA_GRID, ETA_GRID, SIGMA_GRID,
};
