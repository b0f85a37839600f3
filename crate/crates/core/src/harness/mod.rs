//! Experiment harness: configuration, synthetic data, reference solution,
//! metrics, CSV traces and plots.

pub mod config;
pub mod data;
pub mod experiment;
pub mod metrics;
pub mod plot;
pub mod reference;

pub use config::{AlgorithmSpec, ExperimentConfig, NetworkSpec, NetworkTopology, ObjectiveSpec, OUTPUT_DIR_ENV};
pub use data::{generate_logistic_data, generate_quadratic_data, LogisticDataset};
pub use experiment::{
    build_instance, certify, resolve_algorithms, run_experiment, CertificateReport, ExperimentOutcome, Instance,
    RunOutcome, RunSummary,
};
pub use metrics::{read_trace_csv, relative_cost_error, trace_rows, write_trace_csv, TraceRow, TRACE_HEADER};
pub use plot::regenerate_plots;
pub use reference::{reference_solve, ReferenceSolution};
