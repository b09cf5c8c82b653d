//! Experiment harness around `kamrot-core`.
//!
//! An [`ExperimentConfig`] describes a cocycle with a planted rotation class:
//! a base frequency, a constant `exp(theta e)` with a seeded perturbation,
//! and a chain of conjugating factors (torus windings, seeded exponentials,
//! constants). [`synthesize_cocycle`] builds the conjugated cocycle together
//! with its ground truth, and [`run_experiment`] runs the scheme on it,
//! classifies the resulting rotation vector and writes a JSON report and a
//! CSV of per-step diagnostics.
//!
//! Reports are deterministic: the same configuration produces byte-identical
//! JSON, and every report embeds the SHA-256 hash of its configuration and
//! all thresholds its verdict depends on.

pub mod config;
pub mod error;
pub mod experiment;

pub use config::{ExperimentConfig, FactorSpec, FrequencySpec, OutputPaths, PerturbationSpec, Preset};
pub use error::{CliError, CliResult, ErrorClass};
pub use experiment::{
    check_dioph, evaluate_experiment, merge_reports, run_experiment, synthesize_cocycle, DiophCheck,
    ExperimentReport, GroundTruth, MergedReport, Synthesis, Verdict, CSV_COLUMNS,
};
