//! Experiment orchestration: validated JSON configs, seeded deterministic
//! sweeps, RFC-4180 CSV output with a provenance header line, and
//! aggregation of emitted tables.
//!
//! Determinism contract: trial i of an experiment uses seed
//! `base_seed + i`, metric files contain no timing data (wall times go to
//! a sibling `*_times.csv`), and reruns of an identical config produce
//! byte-identical metric files.

mod config;
mod csvio;
mod experiments;
mod summary;

pub use config::{ExperimentConfig, ExperimentKind, SetSpec};
pub use csvio::{format_real, read_csv, write_csv, CsvTable};
pub use experiments::{run_experiment, ExperimentOutput};
pub use summary::{summarize, SummaryOptions};
