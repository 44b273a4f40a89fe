//! Experiment orchestration: configuration, error metrics, CSV output.

pub mod config;
pub mod metrics;
pub mod plot;
pub mod runner;
pub mod table;

pub use config::{CalibrationSource, ConfigError, ExperimentConfig, ExperimentKind, LayoutPool, ModelParams, NoiseMethod, TimeGrid};
pub use metrics::{delta_p_e, delta_p_tot, mean_abs_difference, ErrorSummary, ProbabilitySeries, SeriesLabel};
pub use plot::gnuplot_script;
pub use runner::{run_experiment, RunReport, Sampling};
pub use table::{Cell, CsvTable};
