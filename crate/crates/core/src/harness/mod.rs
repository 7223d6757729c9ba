//! Monte Carlo comparison harness behind the `hedgefw` command line.

pub mod config;
pub mod experiment;
pub mod plot;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, ExperimentSummary, CSV_HEADER};
pub use plot::emit_svg_histograms;
