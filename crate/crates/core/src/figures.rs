//! Canned experiment recipes.
//!
//! Each recipe pins a full parameter grid and its seeds, writes plain CSV
//! outputs plus the exact per-variant config files (re-runnable through the
//! CLI), and a manifest listing everything. Outputs are deterministic: the
//! same recipe always produces byte-identical files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::config::serialize_run_config;
use crate::engine::{auto_snapshot_times, run, run_ensemble, InvalidConfig, RunConfig};
use crate::exchange::{ExchangeParams, Model};
use crate::metrics::{histogram, Binning};
use crate::output::{ensemble_to_csv, hist_to_csv, manifest};
use crate::redistribution::{RedistributionParams, Scheme};
use crate::sweep::{sweep_q, sweep_xi, q_table_to_csv, xi_table_to_csv};

pub const POPULATION: usize = 1000;
pub const INITIAL_WEALTH: f64 = 1.0;
pub const SAVINGS_RATE: f64 = 0.25;
pub const INTEREST_RATE: f64 = 0.05;
pub const TRANSFER_RATE: f64 = 0.5;
pub const HIST_BINS: usize = 50;
pub const ENSEMBLE_SEEDS: u32 = 10;
/// Distribution snapshots are taken at these horizons.
pub const HIST_TIMES: [u64; 3] = [1_000, 10_000, 100_000];
/// Trace horizon for the Gini-trajectory recipes.
pub const TRACE_STEPS: u64 = 100_000;
/// Sweep recipes run ten transfer periods so the periodic state is settled.
pub const SWEEP_PERIODS: u64 = 10;
pub const XI_GRID: [f64; 9] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
pub const Q_GRID: [u64; 8] = [1, 2, 3, 4, 5, 6, 8, 10];
pub const TRANSFER_PERIODS: [u64; 2] = [10_000, 100_000];

#[derive(Debug, Error)]
pub enum FigureError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Sim(#[from] InvalidConfig),
    #[error(transparent)]
    Sweep(#[from] crate::sweep::SweepError),
}

/// Recipe selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    F3A,
    F3B,
    F3C,
    F3D,
    F4,
    F5,
    F6,
    F7,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::F3A,
        FigureId::F3B,
        FigureId::F3C,
        FigureId::F3D,
        FigureId::F4,
        FigureId::F5,
        FigureId::F6,
        FigureId::F7,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::F3A => "3A",
            FigureId::F3B => "3B",
            FigureId::F3C => "3C",
            FigureId::F3D => "3D",
            FigureId::F4 => "4",
            FigureId::F5 => "5",
            FigureId::F6 => "6",
            FigureId::F7 => "7",
        }
    }

    fn base_seed(self) -> u64 {
        match self {
            FigureId::F3A => 301,
            FigureId::F3B => 302,
            FigureId::F3C => 303,
            FigureId::F3D => 304,
            FigureId::F4 => 401,
            FigureId::F5 => 501,
            FigureId::F6 => 601,
            FigureId::F7 => 701,
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "3A" => Ok(FigureId::F3A),
            "3B" => Ok(FigureId::F3B),
            "3C" => Ok(FigureId::F3C),
            "3D" => Ok(FigureId::F3D),
            "4" => Ok(FigureId::F4),
            "5" => Ok(FigureId::F5),
            "6" => Ok(FigureId::F6),
            "7" => Ok(FigureId::F7),
            other => Err(format!(
                "unknown figure id `{other}` (expected one of 3A, 3B, 3C, 3D, 4, 5, 6, 7)"
            )),
        }
    }
}

/// A named exchange variant within a recipe.
struct Variant {
    tag: &'static str,
    params: ExchangeParams,
}

fn exchange(model: Model, rho: f64, delta_w: f64) -> ExchangeParams {
    ExchangeParams {
        model,
        lambda: SAVINGS_RATE,
        rho,
        delta_w,
        delta_bias: 0.0,
    }
}

fn trace_variants() -> Vec<Variant> {
    vec![
        Variant {
            tag: "R",
            params: exchange(Model::R, 0.0, 0.0),
        },
        Variant {
            tag: "L_rho0",
            params: exchange(Model::L, 0.0, 0.1),
        },
        Variant {
            tag: "L_rho0.05",
            params: exchange(Model::L, INTEREST_RATE, 0.1),
        },
        Variant {
            tag: "J_dw0.1",
            params: exchange(Model::J, 0.0, 0.1),
        },
        Variant {
            tag: "J_dw0.2",
            params: exchange(Model::J, 0.0, 0.2),
        },
    ]
}

fn redistribution_variants() -> Vec<Variant> {
    vec![
        Variant {
            tag: "R",
            params: exchange(Model::R, 0.0, 0.0),
        },
        Variant {
            tag: "L",
            params: exchange(Model::L, INTEREST_RATE, 0.1),
        },
        Variant {
            tag: "J_dw0.1",
            params: exchange(Model::J, 0.0, 0.1),
        },
        Variant {
            tag: "J_dw0.2",
            params: exchange(Model::J, 0.0, 0.2),
        },
    ]
}

struct OutDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    fn create(dir: &Path) -> Result<Self, FigureError> {
        fs::create_dir_all(dir).map_err(|source| FigureError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), FigureError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| FigureError::Io {
            path: path.clone(),
            source,
        })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(
        mut self,
        title: &str,
        params: Vec<(String, String)>,
    ) -> Result<Vec<PathBuf>, FigureError> {
        let listed = self.files.clone();
        let text = manifest(title, &params, &listed);
        self.write("manifest.txt", &text)?;
        Ok(self
            .files
            .iter()
            .map(|name| self.dir.join(name))
            .collect())
    }
}

/// Run one canned recipe, writing its file set under `out_dir`.
pub fn reproduce_figure(id: FigureId, out_dir: &Path) -> Result<Vec<PathBuf>, FigureError> {
    match id {
        FigureId::F3A => distribution_recipe(id, out_dir, exchange(Model::R, 0.0, 0.0), Binning::Linear),
        FigureId::F3B => distribution_recipe(
            id,
            out_dir,
            exchange(Model::L, INTEREST_RATE, 0.1),
            Binning::Logarithmic,
        ),
        FigureId::F3C => distribution_recipe(id, out_dir, exchange(Model::J, 0.0, 0.1), Binning::Linear),
        FigureId::F3D => distribution_recipe(id, out_dir, exchange(Model::J, 0.0, 0.2), Binning::Linear),
        FigureId::F4 => trace_recipe(id, out_dir),
        FigureId::F5 => transfer_trace_recipe(id, out_dir),
        FigureId::F6 => xi_sweep_recipe(id, out_dir),
        FigureId::F7 => q_sweep_recipe(id, out_dir),
    }
}

/// Wealth histograms of a single seeded run at several horizons. A shorter
/// run with the same seed is an exact prefix of a longer one, so each
/// horizon is just a separate run.
fn distribution_recipe(
    id: FigureId,
    out_dir: &Path,
    params: ExchangeParams,
    binning: Binning,
) -> Result<Vec<PathBuf>, FigureError> {
    let mut out = OutDir::create(out_dir)?;
    let model = params.model.as_str();
    for &t in &HIST_TIMES {
        let config = RunConfig {
            exchange: params,
            redistribution: RedistributionParams::none(),
            n_agents: POPULATION,
            initial_wealth: INITIAL_WEALTH,
            total_steps: t,
            snapshot_times: vec![0, t],
            seed: id.base_seed(),
        };
        let trajectory = run(&config)?;
        let hist = histogram(&trajectory.final_wealth, binning, HIST_BINS)
            .expect("non-empty wealth vector");
        out.write(&format!("hist_{model}_t{t}.csv"), &hist_to_csv(&hist))?;
        out.write(&format!("config_{model}_t{t}.cfg"), &serialize_run_config(&config))?;
    }
    out.finish(
        &format!("figure {id}"),
        vec![
            ("binning".to_string(), binning.as_str().to_string()),
            ("n_bins".to_string(), HIST_BINS.to_string()),
            ("seed".to_string(), id.base_seed().to_string()),
        ],
    )
}

/// Gini trajectories for the plain exchange models.
fn trace_recipe(id: FigureId, out_dir: &Path) -> Result<Vec<PathBuf>, FigureError> {
    let mut out = OutDir::create(out_dir)?;
    for variant in trace_variants() {
        let config = RunConfig {
            exchange: variant.params,
            redistribution: RedistributionParams::none(),
            n_agents: POPULATION,
            initial_wealth: INITIAL_WEALTH,
            total_steps: TRACE_STEPS,
            snapshot_times: auto_snapshot_times(TRACE_STEPS),
            seed: id.base_seed(),
        };
        let ensemble = run_ensemble(&config, ENSEMBLE_SEEDS, id.base_seed())?;
        out.write(
            &format!("gini_{}.csv", variant.tag),
            &ensemble_to_csv(
                &ensemble.snapshot_times,
                &ensemble.mean_gini,
                ensemble.std_gini.as_deref(),
            ),
        )?;
        out.write(
            &format!("config_{}.cfg", variant.tag),
            &serialize_run_config(&config),
        )?;
    }
    out.finish(
        &format!("figure {id}"),
        vec![
            ("n_seeds".to_string(), ENSEMBLE_SEEDS.to_string()),
            ("base_seed".to_string(), id.base_seed().to_string()),
        ],
    )
}

/// Gini trajectories with the uniform transfer switched on.
fn transfer_trace_recipe(id: FigureId, out_dir: &Path) -> Result<Vec<PathBuf>, FigureError> {
    let mut out = OutDir::create(out_dir)?;
    for &t_p in &TRANSFER_PERIODS {
        for variant in redistribution_variants() {
            let config = RunConfig {
                exchange: variant.params,
                redistribution: RedistributionParams {
                    scheme: Scheme::Transfer,
                    xi: TRANSFER_RATE,
                    t_p,
                    q: 1,
                },
                n_agents: POPULATION,
                initial_wealth: INITIAL_WEALTH,
                total_steps: TRACE_STEPS,
                snapshot_times: auto_snapshot_times(TRACE_STEPS),
                seed: id.base_seed(),
            };
            let ensemble = run_ensemble(&config, ENSEMBLE_SEEDS, id.base_seed())?;
            out.write(
                &format!("gini_{}-T_tp{}.csv", variant.tag, t_p),
                &ensemble_to_csv(
                    &ensemble.snapshot_times,
                    &ensemble.mean_gini,
                    ensemble.std_gini.as_deref(),
                ),
            )?;
            out.write(
                &format!("config_{}-T_tp{}.cfg", variant.tag, t_p),
                &serialize_run_config(&config),
            )?;
        }
    }
    out.finish(
        &format!("figure {id}"),
        vec![
            ("xi".to_string(), TRANSFER_RATE.to_string()),
            ("n_seeds".to_string(), ENSEMBLE_SEEDS.to_string()),
            ("base_seed".to_string(), id.base_seed().to_string()),
        ],
    )
}

/// Long-run Gini versus transfer rate.
fn xi_sweep_recipe(id: FigureId, out_dir: &Path) -> Result<Vec<PathBuf>, FigureError> {
    let mut out = OutDir::create(out_dir)?;
    for &t_p in &TRANSFER_PERIODS {
        let total_steps = t_p * SWEEP_PERIODS;
        for variant in redistribution_variants() {
            let config = RunConfig {
                exchange: variant.params,
                redistribution: RedistributionParams {
                    scheme: Scheme::Transfer,
                    xi: TRANSFER_RATE,
                    t_p,
                    q: 1,
                },
                n_agents: POPULATION,
                initial_wealth: INITIAL_WEALTH,
                total_steps,
                snapshot_times: auto_snapshot_times(total_steps),
                seed: id.base_seed(),
            };
            let rows = sweep_xi(&config, &XI_GRID, ENSEMBLE_SEEDS)?;
            out.write(
                &format!("xi_sweep_{}-T_tp{}.csv", variant.tag, t_p),
                &xi_table_to_csv(&rows),
            )?;
            out.write(
                &format!("config_{}-T_tp{}.cfg", variant.tag, t_p),
                &serialize_run_config(&config),
            )?;
        }
    }
    out.finish(
        &format!("figure {id}"),
        vec![
            (
                "xi_grid".to_string(),
                XI_GRID.map(|v| v.to_string()).join(","),
            ),
            ("sweep_periods".to_string(), SWEEP_PERIODS.to_string()),
            ("n_seeds".to_string(), ENSEMBLE_SEEDS.to_string()),
            ("base_seed".to_string(), id.base_seed().to_string()),
        ],
    )
}

/// Long-run Gini versus quantile divisor.
fn q_sweep_recipe(id: FigureId, out_dir: &Path) -> Result<Vec<PathBuf>, FigureError> {
    let mut out = OutDir::create(out_dir)?;
    let t_p = 100_000;
    let total_steps = t_p * SWEEP_PERIODS;
    for variant in redistribution_variants() {
        let config = RunConfig {
            exchange: variant.params,
            redistribution: RedistributionParams {
                scheme: Scheme::Quantile,
                xi: TRANSFER_RATE,
                t_p,
                q: 1,
            },
            n_agents: POPULATION,
            initial_wealth: INITIAL_WEALTH,
            total_steps,
            snapshot_times: auto_snapshot_times(total_steps),
            seed: id.base_seed(),
        };
        let rows = sweep_q(&config, &Q_GRID, ENSEMBLE_SEEDS)?;
        out.write(
            &format!("q_sweep_{}-Q.csv", variant.tag),
            &q_table_to_csv(&rows),
        )?;
        out.write(
            &format!("config_{}-Q.cfg", variant.tag),
            &serialize_run_config(&config),
        )?;
    }
    out.finish(
        &format!("figure {id}"),
        vec![
            (
                "q_grid".to_string(),
                Q_GRID.map(|v| v.to_string()).join(","),
            ),
            ("t_p".to_string(), t_p.to_string()),
            ("xi".to_string(), TRANSFER_RATE.to_string()),
            ("sweep_periods".to_string(), SWEEP_PERIODS.to_string()),
            ("n_seeds".to_string(), ENSEMBLE_SEEDS.to_string()),
            ("base_seed".to_string(), id.base_seed().to_string()),
        ],
    )
}
