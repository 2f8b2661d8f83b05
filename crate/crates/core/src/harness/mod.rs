//! Monte-Carlo regret experiments: configuration, parallel trials,
//! aggregation, parameter sweeps, scaling fits and export.
//!
//! Every trial is seeded from `(seed, trial index, arm)` alone, so results
//! are reproducible regardless of how many workers run them.

mod config;
mod experiment;
mod export;
mod fit;
mod sweep;

pub use config::{
    parse_count, parse_kv, EpsRule, EtcExplorationRule, ExperimentConfig, ExportFormat, UcbExploration, CONFIG_KEYS,
    DESK_TRIALS, FULL_SCALE_TRIALS,
};
pub use experiment::{
    regret_of_trajectory, run_experiment, summarize, worker_count, AggregateResult, OptimalValue, ResultRow,
};
pub use export::{export, parse_csv, to_csv, to_json, to_svg};
pub use fit::{fit_power_law, fit_scaling, ScalingFit};
pub use sweep::{
    evenly_spaced_arms, sweep, sweep_point, SweepKind, GAP_BASE_MEAN, OVER_K_HORIZON, OVER_RHO_HORIZON,
};
