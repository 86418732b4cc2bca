//! Experiment harness: baseline and LDWPSO runs repeated over derived seeds,
//! per-epoch accuracy statistics, and the CSV files that record them.
//!
//! Every seed in an experiment derives from one master seed, so a fixed
//! configuration reproduces its CSV output byte for byte regardless of the
//! number of evaluation workers. Wall-clock timings are kept out of CSVs.

mod config;
mod report;
mod run;

pub use config::{schedule_from_parts, DatasetKind, ExperimentConfig, FitnessTarget};
pub use report::{
    compare, comparison_table, mean, read_comparison_csv, read_report_rows, sample_variance, sig6,
    write_comparison_csv, ComparisonRow, EpochRow, RunReport, NOT_AVAILABLE,
};
pub use run::{
    derive_seed, prepare_data, run_baseline, run_bench, run_ldwpso, EvalLogEntry, EvalStatus, Evaluation, LdwpsoRun,
    PreparedData,
};

use thiserror::Error;

use crate::data::DataError;
use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(#[from] DataError),
    #[error("{method} repeat {repeat} diverged in epoch {epoch}")]
    Diverged { method: String, repeat: usize, epoch: usize },
    #[error("every particle of the initial swarm in repeat {repeat} scored infinity; check the data and search space")]
    AllInfeasible { repeat: usize },
    #[error("report error: {0}")]
    Report(String),
    #[error(transparent)]
    Network(NnError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Data(_) => 3,
            ExperimentError::Diverged { .. } | ExperimentError::AllInfeasible { .. } => 4,
            ExperimentError::Report(_) => 5,
            ExperimentError::Network(_) | ExperimentError::Csv(_) | ExperimentError::Io(_) => 1,
        }
    }
}
