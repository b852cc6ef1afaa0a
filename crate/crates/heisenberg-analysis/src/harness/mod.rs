//! Experiment runner: configuration, the verification experiments, reports
//! and the command-line front end.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{
    run_adams_check, run_endpoint_check, run_experiment, run_hedberg_check, run_kernel_bounds, run_maximal_morrey_check,
    run_rho_lemma_check, run_weak_adams_check,
};
pub use report::{emit_report, parse_formats, Format, InequalityReport};
