//! Experiment files: flat `key=value` text with `#` comments.
//!
//! Every experiment in this simulator is a flat parameter set, so the config
//! format is deliberately flat too: one key per line, `#` starts a comment,
//! unknown and duplicate keys are rejected. Missing keys take the documented
//! defaults below; only `seed` is required.
//!
//! | key            | default  | meaning                                     |
//! |----------------|----------|---------------------------------------------|
//! | model          | R        | exchange rule: R, L or J                     |
//! | redistribution | none     | scheme: none, T or Q                         |
//! | n_agents       | 1000     | population size (>= 2)                       |
//! | initial_wealth | 1        | common starting wealth                       |
//! | lambda         | 0.25     | savings rate, 0 <= lambda < 1                |
//! | rho            | 0.05     | interest rate, >= 0 (L only)                 |
//! | delta_w        | 0.1      | profit/loss half-width, >= 0 (L and J)       |
//! | xi             | 0.5      | transfer rate, 0 <= xi <= 1                  |
//! | t_p            | 100000   | transfer period in exchange events (>= 1)    |
//! | q              | 4        | quantile divisor (>= 1, Q only)              |
//! | total_steps    | 100000   | exchange events to run                       |
//! | snapshots      | auto     | comma list of times, or `auto`               |
//! | seed           | required | base seed                                    |
//! | n_seeds        | 1        | ensemble size                                |
//! | delta_bias     | 0        | additive shift of the profit/loss interval   |

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::engine::{auto_snapshot_times, RunConfig};
use crate::exchange::{ExchangeParams, Model};
use crate::redistribution::{RedistributionParams, Scheme};

/// A parsed experiment: one run configuration plus the ensemble size.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub config: RunConfig,
    pub n_seeds: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {kind}")]
    At {
        line: usize,
        column: usize,
        kind: ConfigErrorKind,
    },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, PartialEq, Eq)]
pub enum ConfigErrorKind {
    UnknownKey(String),
    DuplicateKey(String),
    MalformedLine,
    MalformedNumber { key: String, value: String },
    InvalidValue { key: String, reason: String },
}

impl fmt::Display for ConfigErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigErrorKind::UnknownKey(key) => write!(f, "unknown key `{key}`"),
            ConfigErrorKind::DuplicateKey(key) => write!(f, "duplicate key `{key}`"),
            ConfigErrorKind::MalformedLine => {
                write!(f, "malformed line, expected `key=value`")
            }
            ConfigErrorKind::MalformedNumber { key, value } => {
                write!(f, "malformed number `{value}` for key `{key}`")
            }
            ConfigErrorKind::InvalidValue { key, reason } => {
                write!(f, "invalid value for key `{key}`: {reason}")
            }
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "model",
    "redistribution",
    "n_agents",
    "initial_wealth",
    "lambda",
    "rho",
    "delta_w",
    "xi",
    "t_p",
    "q",
    "total_steps",
    "snapshots",
    "seed",
    "n_seeds",
    "delta_bias",
];

#[derive(Debug, Clone, PartialEq)]
enum SnapshotSpec {
    Auto,
    Explicit(Vec<u64>),
}

/// Parse an experiment file. Defaults are applied for absent keys; `seed`
/// is required. Diagnostics carry the 1-based line and column of the
/// offending token.
pub fn parse_config(text: &str) -> Result<Experiment, ConfigError> {
    let mut model = Model::R;
    let mut scheme = Scheme::None;
    let mut n_agents: usize = 1000;
    let mut initial_wealth: f64 = 1.0;
    let mut lambda: f64 = 0.25;
    let mut rho: f64 = 0.05;
    let mut delta_w: f64 = 0.1;
    let mut xi: f64 = 0.5;
    let mut t_p: u64 = 100_000;
    let mut q: u64 = 4;
    let mut total_steps: u64 = 100_000;
    let mut snapshots = SnapshotSpec::Auto;
    let mut seed: Option<u64> = None;
    let mut n_seeds: u32 = 1;
    let mut delta_bias: f64 = 0.0;

    let mut seen: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let first_col = 1 + line.len() - line.trim_start().len();
        let eq = line.find('=').ok_or(ConfigError::At {
            line: lineno,
            column: first_col,
            kind: ConfigErrorKind::MalformedLine,
        })?;
        let key_part = &line[..eq];
        let value_part = &line[eq + 1..];
        let key = key_part.trim();
        let value = value_part.trim();
        let key_col = 1 + key_part.len() - key_part.trim_start().len();
        let value_col = eq + 2 + value_part.len() - value_part.trim_start().len();

        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::At {
                line: lineno,
                column: key_col,
                kind: ConfigErrorKind::UnknownKey(key.to_string()),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::At {
                line: lineno,
                column: key_col,
                kind: ConfigErrorKind::DuplicateKey(key.to_string()),
            });
        }

        let at = |kind: ConfigErrorKind| ConfigError::At {
            line: lineno,
            column: value_col,
            kind,
        };
        let invalid = |reason: String| {
            at(ConfigErrorKind::InvalidValue {
                key: key.to_string(),
                reason,
            })
        };

        match key {
            "model" => {
                model = match value {
                    "R" => Model::R,
                    "L" => Model::L,
                    "J" => Model::J,
                    other => {
                        return Err(invalid(format!("expected R, L or J, got `{other}`")));
                    }
                };
            }
            "redistribution" => {
                scheme = match value {
                    "none" => Scheme::None,
                    "T" => Scheme::Transfer,
                    "Q" => Scheme::Quantile,
                    other => {
                        return Err(invalid(format!("expected none, T or Q, got `{other}`")));
                    }
                };
            }
            "n_agents" => {
                n_agents = parse_number::<usize>(key, value, lineno, value_col)?;
                if n_agents < 2 {
                    return Err(invalid("must be >= 2".to_string()));
                }
            }
            "initial_wealth" => {
                initial_wealth = parse_finite(key, value, lineno, value_col)?;
            }
            "lambda" => {
                lambda = parse_finite(key, value, lineno, value_col)?;
                if !(0.0..1.0).contains(&lambda) {
                    return Err(invalid("must satisfy 0 <= lambda < 1".to_string()));
                }
            }
            "rho" => {
                rho = parse_finite(key, value, lineno, value_col)?;
                if rho < 0.0 {
                    return Err(invalid("must be >= 0".to_string()));
                }
            }
            "delta_w" => {
                delta_w = parse_finite(key, value, lineno, value_col)?;
                if delta_w < 0.0 {
                    return Err(invalid("must be >= 0".to_string()));
                }
            }
            "xi" => {
                xi = parse_finite(key, value, lineno, value_col)?;
                if !(0.0..=1.0).contains(&xi) {
                    return Err(invalid("must satisfy 0 <= xi <= 1".to_string()));
                }
            }
            "t_p" => {
                t_p = parse_number::<u64>(key, value, lineno, value_col)?;
                if t_p < 1 {
                    return Err(invalid("must be >= 1".to_string()));
                }
            }
            "q" => {
                q = parse_number::<u64>(key, value, lineno, value_col)?;
                if q < 1 {
                    return Err(invalid("must be >= 1".to_string()));
                }
            }
            "total_steps" => {
                total_steps = parse_number::<u64>(key, value, lineno, value_col)?;
            }
            "snapshots" => {
                if value == "auto" {
                    snapshots = SnapshotSpec::Auto;
                } else {
                    let mut times = Vec::new();
                    for piece in value.split(',') {
                        times.push(parse_number::<u64>(key, piece.trim(), lineno, value_col)?);
                    }
                    times.sort_unstable();
                    times.dedup();
                    snapshots = SnapshotSpec::Explicit(times);
                }
            }
            "seed" => {
                seed = Some(parse_number::<u64>(key, value, lineno, value_col)?);
            }
            "n_seeds" => {
                n_seeds = parse_number::<u32>(key, value, lineno, value_col)?;
                if n_seeds < 1 {
                    return Err(invalid("must be >= 1".to_string()));
                }
            }
            "delta_bias" => {
                delta_bias = parse_finite(key, value, lineno, value_col)?;
            }
            _ => unreachable!("key membership checked above"),
        }
    }

    let seed = seed.ok_or(ConfigError::MissingKey("seed"))?;
    let snapshot_times = match snapshots {
        SnapshotSpec::Auto => auto_snapshot_times(total_steps),
        SnapshotSpec::Explicit(times) => times,
    };

    let config = RunConfig {
        exchange: ExchangeParams {
            model,
            lambda,
            rho,
            delta_w,
            delta_bias,
        },
        redistribution: RedistributionParams {
            scheme,
            xi,
            t_p,
            q,
        },
        n_agents,
        initial_wealth,
        total_steps,
        snapshot_times,
        seed,
    };
    config
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    Ok(Experiment { config, n_seeds })
}

fn parse_number<T: std::str::FromStr>(
    key: &str,
    value: &str,
    line: usize,
    column: usize,
) -> Result<T, ConfigError> {
    value.parse::<T>().map_err(|_| ConfigError::At {
        line,
        column,
        kind: ConfigErrorKind::MalformedNumber {
            key: key.to_string(),
            value: value.to_string(),
        },
    })
}

fn parse_finite(key: &str, value: &str, line: usize, column: usize) -> Result<f64, ConfigError> {
    let v = parse_number::<f64>(key, value, line, column)?;
    if !v.is_finite() {
        return Err(ConfigError::At {
            line,
            column,
            kind: ConfigErrorKind::InvalidValue {
                key: key.to_string(),
                reason: "must be finite".to_string(),
            },
        });
    }
    Ok(v)
}

/// Canonical serialization of a run configuration, one key per line in a
/// fixed order. `parse_config` of this text reproduces the config exactly.
pub fn serialize_run_config(config: &RunConfig) -> String {
    let snapshots = config
        .snapshot_times
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "model={}\n\
         redistribution={}\n\
         n_agents={}\n\
         initial_wealth={}\n\
         lambda={}\n\
         rho={}\n\
         delta_w={}\n\
         xi={}\n\
         t_p={}\n\
         q={}\n\
         total_steps={}\n\
         snapshots={}\n\
         seed={}\n\
         delta_bias={}\n",
        config.exchange.model.as_str(),
        config.redistribution.scheme.as_str(),
        config.n_agents,
        config.initial_wealth,
        config.exchange.lambda,
        config.exchange.rho,
        config.exchange.delta_w,
        config.redistribution.xi,
        config.redistribution.t_p,
        config.redistribution.q,
        config.total_steps,
        snapshots,
        config.seed,
        config.exchange.delta_bias,
    )
}

/// Canonical serialization of an experiment (run config plus `n_seeds`).
pub fn serialize_experiment(experiment: &Experiment) -> String {
    format!(
        "{}n_seeds={}\n",
        serialize_run_config(&experiment.config),
        experiment.n_seeds
    )
}
