//! Experiment configuration, seeded trial execution and result emission.

mod config;
mod constants;
mod run;

pub use config::{
    Algorithm, ExperimentConfig, ExperimentKind, InitChoice, OutputPaths, ParamSpec, SchemeOverride,
};
pub use constants::{constants_table, render_constants, report_constants, ConstantsRow};
pub use run::{error_json, execute, prepare, run_config, Prepared, ResultRow, RunOutput};
