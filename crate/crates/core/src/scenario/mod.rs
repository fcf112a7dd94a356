//! JSON-configured batch runs.
//!
//! A [`ScenarioConfig`] names a Hamiltonian, an initial state, a time grid,
//! observables and a list of tasks. [`run`] executes the tasks, writes CSV
//! time series next to a single `report.json`, and returns the report.
//!
//! Exit statuses: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 numerical failure in at least one task.

mod config;
mod csv;
mod report;

pub use config::{
    max_dim_from_env, GeneratorSpec, HamiltonianSpec, InitialState, ObservableSpec, Prepared,
    ScenarioConfig, Task, TimeSpec, Tolerances, DEFAULT_MAX_DIM, DEFAULT_SEED, DEFAULT_SUBSTEPS,
    MAX_DIM_ENV,
};
pub use csv::{emit_csv, format_value};
pub use report::{run, Artifact, RunOptions, RunReport, TaskOutcome, REPORT_FILE};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Numerical(#[from] crate::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Io(_) => 1,
            ScenarioError::Validation(_) => 2,
            ScenarioError::Numerical(_) => 3,
        }
    }
}
