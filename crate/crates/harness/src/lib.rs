//! Experiment harness: configuration files, scenario generation, sweep
//! drivers, estimation-bound validation and result emission.

pub mod config_file;
pub mod crb_validate;
pub mod emit;
pub mod experiments;
pub mod scenario_gen;

pub use config_file::ConfigFile;
pub use crb_validate::{validate_crb, CrbValidation};
pub use emit::{emit_results, parse_rows_csv, RunManifest};
pub use experiments::{
    run_crb_sweep, run_region_sweep, run_single, Baseline, ExperimentKind, ExperimentSpec,
    ResultRow, RowStatus,
};
pub use scenario_gen::{derive_seed, generate_scenario, randomize_positions};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] iscsc_core::Error),
    #[error("{0}")]
    Other(String),
}
