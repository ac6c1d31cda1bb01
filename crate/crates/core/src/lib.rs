//! Deterministic kinetic wealth-exchange and redistribution simulator.
//!
//! A population of `N` agents repeatedly exchanges wealth in randomly
//! selected pairs under one of three kernels — random exchange (R), loan
//! interest (L), or joint venture (J) — optionally combined with periodic
//! redistribution: a uniform transfer to everyone else (T) or a
//! quantile-targeted transfer from rich to poor (Q). The engine tracks
//! Gini-index trajectories, wealth histograms, and tail behaviour, runs
//! seed-ensembles in parallel, and sweeps transfer rates and quantile
//! divisors.
//!
//! Everything is reproducible: a run is a pure function of `(seed, config)`,
//! bit-identical across platforms and re-runs.

pub mod config;
pub mod engine;
pub mod exchange;
pub mod figures;
pub mod metrics;
pub mod output;
pub mod population;
pub mod redistribution;
pub mod rng;
pub mod sweep;

pub use config::{parse_config, serialize_experiment, serialize_run_config, ConfigError, Experiment};
pub use engine::{
    auto_snapshot_times, run, run_ensemble, step, EnsembleResult, InvalidConfig, RunConfig,
    Trajectory,
};
pub use exchange::{
    apply_j, apply_l, apply_r, joint_factor, ExchangeDraw, ExchangeParams, Model,
};
pub use metrics::{
    gini, histogram, tail_slope, top_share, Binning, DegeneracyFlag, Gini, Histogram,
    MetricsError, MetricsSnapshot, TailSlope,
};
pub use population::{select_pair, Population, PopulationError};
pub use redistribution::{
    apply_q, apply_t, quantile_stats, QuantileOutcome, QuantileStats, RedistributionError,
    RedistributionParams, Scheme,
};
pub use rng::RngStream;
