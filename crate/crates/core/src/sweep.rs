//! Parameter sweeps: one ensemble per grid point.
//!
//! Every cell reuses the base config's seed as the ensemble base seed, so
//! rows are paired across grid points (same seeds everywhere), duplicate
//! grid entries produce identical rows, and a `q = 1` sweep row matches a
//! no-redistribution baseline run exactly.

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{run_ensemble, InvalidConfig, RunConfig};
use crate::output::fmt_f64;
use crate::redistribution::Scheme;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SweepError {
    #[error("transfer-rate sweep needs scheme T or Q, got {0}")]
    XiNeedsTransferScheme(&'static str),
    #[error("quantile sweep needs scheme Q, got {0}")]
    QNeedsQuantileScheme(&'static str),
    #[error(transparent)]
    Invalid(#[from] InvalidConfig),
}

/// One transfer-rate grid point: seed-averaged Gini at the final snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct XiSweepRow {
    pub xi: f64,
    pub mean_gini: f64,
    pub std_gini: Option<f64>,
    pub degenerate_rate: f64,
}

/// One quantile grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct QSweepRow {
    pub q: u64,
    pub mean_gini: f64,
    pub std_gini: Option<f64>,
    pub degenerate_rate: f64,
}

/// Sweep the transfer rate over `xi_values`.
pub fn sweep_xi(
    base: &RunConfig,
    xi_values: &[f64],
    n_seeds: u32,
) -> Result<Vec<XiSweepRow>, SweepError> {
    if base.redistribution.scheme == Scheme::None {
        return Err(SweepError::XiNeedsTransferScheme(
            base.redistribution.scheme.as_str(),
        ));
    }
    base.validate()?;
    xi_values
        .par_iter()
        .map(|&xi| {
            let mut config = base.clone();
            config.redistribution.xi = xi;
            let ensemble = run_ensemble(&config, n_seeds, base.seed)?;
            Ok(XiSweepRow {
                xi,
                mean_gini: ensemble.final_mean_gini(),
                std_gini: ensemble.final_std_gini(),
                degenerate_rate: ensemble.degenerate_rate(),
            })
        })
        .collect()
}

/// Sweep the quantile divisor over `q_values`.
pub fn sweep_q(
    base: &RunConfig,
    q_values: &[u64],
    n_seeds: u32,
) -> Result<Vec<QSweepRow>, SweepError> {
    if base.redistribution.scheme != Scheme::Quantile {
        return Err(SweepError::QNeedsQuantileScheme(
            base.redistribution.scheme.as_str(),
        ));
    }
    base.validate()?;
    q_values
        .par_iter()
        .map(|&q| {
            let mut config = base.clone();
            config.redistribution.q = q;
            let ensemble = run_ensemble(&config, n_seeds, base.seed)?;
            Ok(QSweepRow {
                q,
                mean_gini: ensemble.final_mean_gini(),
                std_gini: ensemble.final_std_gini(),
                degenerate_rate: ensemble.degenerate_rate(),
            })
        })
        .collect()
}

pub fn xi_table_to_csv(rows: &[XiSweepRow]) -> String {
    let mut out = String::from("xi,mean_gini,std_gini,degenerate_rate\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(row.xi),
            fmt_f64(row.mean_gini),
            row.std_gini.map(fmt_f64).unwrap_or_default(),
            fmt_f64(row.degenerate_rate),
        ));
    }
    out
}

pub fn q_table_to_csv(rows: &[QSweepRow]) -> String {
    let mut out = String::from("q,inv_q,mean_gini,std_gini,degenerate_rate\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.q,
            fmt_f64(1.0 / row.q as f64),
            fmt_f64(row.mean_gini),
            row.std_gini.map(fmt_f64).unwrap_or_default(),
            fmt_f64(row.degenerate_rate),
        ));
    }
    out
}
