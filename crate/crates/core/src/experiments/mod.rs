//! Config-driven experiment runner, decay-law fitting, and report emission.
//!
//! Pipelines are selected by `[experiment] kind` in the TOML config (see
//! [`config`] for the full grammar) and write machine-readable CSV/JSON
//! reports that are byte-identical across reruns of the same (config, seed).

pub mod config;
pub mod fit;
pub mod report;
pub mod runner;

pub use config::ExperimentConfig;
pub use fit::{fit_decay_rate, fit_points, RateFit, RateModel};
pub use report::{fmt_f64, write_csv, write_field_binary, write_json, ESTIMATE_CSV_HEADER};
pub use runner::{diameter_table, equilibrium_ks_distance, parse_model, run_config, RunSummary};
