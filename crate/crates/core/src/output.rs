//! CSV and manifest serialization.
//!
//! Floats are written in scientific notation with 17 significant digits,
//! which is always enough to reproduce the exact `f64` bit pattern on parse.
//! Trace files carry one row per snapshot; histogram files one row per bin.
//! Manifests are plain text, deterministic (no timestamps), and list every
//! parameter and output file of a command.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::engine::Trajectory;
use crate::metrics::{DegeneracyFlag, Histogram, MetricsSnapshot};

pub const TRACE_HEADER: &str = "t,gini,total,max,min,neg_fraction,flags";
pub const HIST_HEADER: &str = "bin_lo,bin_hi,count,underflow_total";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// 17-significant-digit serialization; round-trips every finite f64 (and
/// NaN/inf spellings) bit-exactly through `str::parse`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.16e}")
    }
}

fn flags_to_str(flags: &BTreeSet<DegeneracyFlag>) -> String {
    flags
        .iter()
        .map(|f| f.as_str())
        .collect::<Vec<_>>()
        .join(";")
}

fn flags_from_str(s: &str, line: usize) -> Result<BTreeSet<DegeneracyFlag>, CsvError> {
    let mut flags = BTreeSet::new();
    if s.is_empty() {
        return Ok(flags);
    }
    for piece in s.split(';') {
        let flag = DegeneracyFlag::parse(piece).ok_or_else(|| CsvError::Malformed {
            line,
            message: format!("unknown flag `{piece}`"),
        })?;
        flags.insert(flag);
    }
    Ok(flags)
}

/// Serialize a snapshot sequence as a trace CSV.
pub fn trace_to_csv(snapshots: &[MetricsSnapshot]) -> String {
    let mut out = String::with_capacity(64 * (snapshots.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for s in snapshots {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.t,
            fmt_f64(s.gini),
            fmt_f64(s.total),
            fmt_f64(s.max),
            fmt_f64(s.min),
            fmt_f64(s.neg_fraction),
            flags_to_str(&s.flags),
        ));
    }
    out
}

/// Parse a trace CSV back into snapshots (bit-exact for finite values).
pub fn trace_from_csv(text: &str) -> Result<Vec<MetricsSnapshot>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRACE_HEADER => {}
        _ => {
            return Err(CsvError::Malformed {
                line: 1,
                message: format!("expected header `{TRACE_HEADER}`"),
            })
        }
    }
    let mut snapshots = Vec::new();
    for (idx, row) in lines {
        let line = idx + 1;
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 7 {
            return Err(CsvError::Malformed {
                line,
                message: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let num = |s: &str, what: &str| -> Result<f64, CsvError> {
            s.parse::<f64>().map_err(|_| CsvError::Malformed {
                line,
                message: format!("bad {what} `{s}`"),
            })
        };
        snapshots.push(MetricsSnapshot {
            t: fields[0].parse().map_err(|_| CsvError::Malformed {
                line,
                message: format!("bad t `{}`", fields[0]),
            })?,
            gini: num(fields[1], "gini")?,
            total: num(fields[2], "total")?,
            max: num(fields[3], "max")?,
            min: num(fields[4], "min")?,
            neg_fraction: num(fields[5], "neg_fraction")?,
            flags: flags_from_str(fields[6], line)?,
        });
    }
    Ok(snapshots)
}

/// Serialize a histogram; `underflow_total` is repeated on every row so each
/// row is self-describing.
pub fn hist_to_csv(hist: &Histogram) -> String {
    let mut out = String::new();
    out.push_str(HIST_HEADER);
    out.push('\n');
    for (k, &count) in hist.counts.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(hist.edges[k]),
            fmt_f64(hist.edges[k + 1]),
            count,
            hist.underflow,
        ));
    }
    out
}

/// Mean/std Gini per snapshot time, one ensemble per file.
pub fn ensemble_to_csv(times: &[u64], mean: &[f64], std: Option<&[f64]>) -> String {
    let mut out = String::from("t,mean_gini,std_gini\n");
    for (idx, &t) in times.iter().enumerate() {
        let std_field = match std {
            Some(s) => fmt_f64(s[idx]),
            None => String::new(),
        };
        out.push_str(&format!("{},{},{}\n", t, fmt_f64(mean[idx]), std_field));
    }
    out
}

/// Deterministic plain-text manifest: a title line, `key=value` parameters,
/// and the produced files.
pub fn manifest(title: &str, params: &[(String, String)], files: &[String]) -> String {
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    out.push('\n');
    for (key, value) in params {
        out.push_str(&format!("{key}={value}\n"));
    }
    out.push('\n');
    out.push_str("files:\n");
    for file in files {
        out.push_str(&format!("  {file}\n"));
    }
    out
}

/// Per-trajectory convenience wrapper.
pub fn trajectory_to_csv(trajectory: &Trajectory) -> String {
    trace_to_csv(&trajectory.snapshots)
}
