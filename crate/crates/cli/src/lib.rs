//! Experiment laboratory on top of `heightlab-core`: configuration,
//! λ-sampling, the four headline experiments, and cached reports.

pub mod config;
pub mod experiments;
pub mod report;
pub mod sampling;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{run_all, RunOutcome};
pub use report::{ExperimentReport, HeightSample};
