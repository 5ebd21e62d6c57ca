//! Experiment plumbing: configuration, seeded noise, bundled models, running
//! and comparing samplers, and JSON/CSV reports.

mod config;
mod noise;
mod presets;
mod run;
mod sweep;

pub use config::{RunConfig, RunMode};
pub use noise::{draw_initial_noise, draw_normals, INITIAL_NOISE};
pub use presets::{resolve_model, ModelField, Preset, LINEAR_RATE};
pub use run::{checksum, execute, run, Deviation, ModeRun, RunReport, REPORT_SCHEMA};
pub use sweep::{sweep, write_sweep_csv, SweepRow, SWEEP_COLUMNS};
