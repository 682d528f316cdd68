//! Benchmark harness: data ingestion, experiment configuration, fitness
//! wiring, the metaheuristic x model matrix, reports and the CLI.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fitness;
pub mod pipeline;
pub mod report;
pub mod selftest;
pub mod synth;
pub mod weather_csv;

pub use config::{ExperimentConfig, Method, ModelKind};
pub use error::{HarnessError, Result};
pub use experiment::{run_cell, run_matrix, RunRecord, RunStatus};
