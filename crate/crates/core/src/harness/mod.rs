//! Monte-Carlo experiment harness: parameter sweeps, CSV output, SVG figures.

mod config;
pub mod demo;
mod summary;
mod svg;
mod sweep;
pub mod validate;

pub use config::{Algorithm, ConfigError, ExperimentConfig};
pub use demo::{run_demo, DemoConfig, DemoError, DemoOutcome};
pub use summary::{summarize, write_summary_csv, SummaryRow, SUMMARY_HEADER};
pub use svg::{render_figure, Estimate};
pub use sweep::{
    run_sweep, sweep_to_dir, thread_count_from_env, write_raw_csv, TrialResult, TrialStatus,
    RAW_HEADER,
};
