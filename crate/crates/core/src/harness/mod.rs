//! Batch experiment driver: configuration, replicated runs, rate fits and output files.

mod config;
mod experiment;
mod output;

pub use config::{
    log_spaced_checkpoints, parse_config, AuxKind, BiasKind, BiasSpec, ConfigError, ExperimentConfig, ProblemSpec,
    DEFAULT_CHECKPOINTS, DEFAULT_REPLICATIONS,
};
pub use experiment::{
    aggregate, build_app, build_problem, fit_upper, run_experiment, run_replication, ExperimentOutcome, GapRow, GapTable,
    RateFits, ReplicationGaps, SeriesFit,
};
pub use output::{
    emit_outputs, fit_csv, gaps_csv, plot_data, CONFIG_ECHO_FILE, FIT_FILE, FIT_HEADER, GAPS_FILE, GAPS_HEADER, PLOT_FILE,
};
