//! Census, sweeps and heatmaps over dephasing tasks, with CSV/JSON output.

pub mod census;
pub mod persist;
pub mod sweep;
pub mod tasks;

use thiserror::Error;

pub use census::{feasibility_census, CensusConfig, CensusResult, Proportion, WorkVerdict};
pub use persist::{load_sweep, save_json, save_sweep, write_sweep_csv, Manifest};
pub use sweep::{
    default_heatmap_rho1, gamma_sweep, n_sweep, replay_error, work_heatmap, GridSpec, SweepKind, SweepPoint,
    SweepResult, SweepSetup,
};
pub use tasks::{dephase, dephasing_task, Sampling};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Core(#[from] dualq_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
