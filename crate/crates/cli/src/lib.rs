//! Experiment harness for `hypervec`: configuration, cross-validated
//! experiments, parameter sweeps and backend benchmarks, plus the
//! `hypervec` command line built on them.

pub mod artifacts;
pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod pipeline;
pub mod sweep;

pub use bench::{run_bench, BenchReport};
pub use config::{Backend, ExperimentConfig, SplitMode, TrainingMode};
pub use error::{CliError, CliResult};
pub use experiment::{run_experiment, ExperimentOutcome, ExperimentReport};
pub use sweep::{run_sweep, SweepAxis};
