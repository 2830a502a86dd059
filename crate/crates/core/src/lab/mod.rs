//! Experiment runner: configuration, built-in catalog, seeded sweeps and artifact emission.

pub mod catalog;
pub mod config;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::{
    AnalysisParams, Assertion, ExperimentConfig, ExperimentKind, IterationParams, ScaleVerifyParams, SweepParams,
    ThetaSource,
};
pub use report::{
    default_formats, emit_report, parse_formats, run_and_report, write_failure_manifest, Format, RunOutcome, Summary, EXIT_ASSERTION,
    EXIT_CONFIG, EXIT_PASS, EXIT_RUNTIME,
};
pub use run::{run_experiment, AssertionOutcome, ProfileArtifact, RunArtifacts, Table};
pub use sweep::{exponent_sweep, sample_tuples, SweepRow, Tuple};
