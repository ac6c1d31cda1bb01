//! Inequality and distribution measurements.
//!
//! The Gini index follows the rank formulation: sort ascending, then
//! `g = 2 * sum(i * r_i) / (N * sum(r_i)) - (N+1)/N` with 1-based ranks.
//! For non-negative inputs this matches the pairwise mean-absolute-difference
//! definition and lies in `[0, (N-1)/N]`. Negative wealth is legal input: the
//! formula is computed literally and the result is flagged as out-of-range
//! instead of being rebased or truncated, since truncation would silently
//! change results downstream.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("gini undefined: total wealth is zero")]
    ZeroTotalWealth,
    #[error("logarithmic binning needs at least one positive sample")]
    NoPositiveSamples,
    #[error("histogram needs at least one bin")]
    NoBins,
    #[error("tail slope needs a logarithmic histogram")]
    NotLogarithmic,
    #[error("tail slope needs at least 3 non-empty bins above the modal bin, got {0}")]
    InsufficientTailBins(usize),
}

/// Gini index of a wealth vector, plus a warning when negative entries were
/// present (the value may then exceed `(N-1)/N`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gini {
    pub value: f64,
    pub negative_inputs: bool,
}

/// Rank-formula Gini index. Rejects an all-zero total (division by zero).
pub fn gini(wealth: &[f64]) -> Result<Gini, MetricsError> {
    if wealth.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sorted = wealth.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("wealth must not contain NaN"));
    let n = sorted.len() as f64;
    let mut ranked = 0.0;
    let mut total = 0.0;
    for (k, &r) in sorted.iter().enumerate() {
        ranked += (k + 1) as f64 * r;
        total += r;
    }
    if total == 0.0 {
        return Err(MetricsError::ZeroTotalWealth);
    }
    Ok(Gini {
        value: 2.0 * ranked / (n * total) - (n + 1.0) / n,
        negative_inputs: wealth.iter().any(|&w| w < 0.0),
    })
}

/// Share of total wealth held by the top `fraction` of agents
/// (`ceil(fraction * N)` agents, at least one).
pub fn top_share(wealth: &[f64], fraction: f64) -> Result<f64, MetricsError> {
    if wealth.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sorted = wealth.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("wealth must not contain NaN"));
    let total: f64 = sorted.iter().sum();
    if total == 0.0 {
        return Err(MetricsError::ZeroTotalWealth);
    }
    let k = ((fraction * sorted.len() as f64).ceil() as usize).max(1);
    Ok(sorted.iter().take(k).sum::<f64>() / total)
}

// ── Histograms ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binning {
    Linear,
    Logarithmic,
}

impl Binning {
    pub fn as_str(self) -> &'static str {
        match self {
            Binning::Linear => "linear",
            Binning::Logarithmic => "logarithmic",
        }
    }
}

/// Binned wealth distribution.
///
/// `edges` has `counts.len() + 1` strictly increasing entries; bins are
/// right-open except the last, which is right-closed. Logarithmic binning
/// covers positive samples only; everything at or below zero lands in
/// `underflow`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub binning: Binning,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow
    }

    /// Geometric bin center, the natural center for log bins.
    pub fn center(&self, bin: usize) -> f64 {
        match self.binning {
            Binning::Linear => 0.5 * (self.edges[bin] + self.edges[bin + 1]),
            Binning::Logarithmic => (self.edges[bin] * self.edges[bin + 1]).sqrt(),
        }
    }
}

/// Bin a wealth vector.
///
/// Linear bins span `[min, max]` evenly; logarithmic bins span
/// `[min positive, max]` geometrically. A degenerate span (all binned
/// samples equal) is widened symmetrically (by 0.5 linearly, by a factor of
/// 2 geometrically) so edges stay strictly increasing.
pub fn histogram(wealth: &[f64], binning: Binning, n_bins: usize) -> Result<Histogram, MetricsError> {
    if wealth.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if n_bins == 0 {
        return Err(MetricsError::NoBins);
    }
    let (lo, hi, underflow) = match binning {
        Binning::Linear => {
            let lo = wealth.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = wealth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi, 0u64)
        }
        Binning::Logarithmic => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut under = 0u64;
            for &w in wealth {
                if w > 0.0 {
                    lo = lo.min(w);
                    hi = hi.max(w);
                } else {
                    under += 1;
                }
            }
            if !lo.is_finite() {
                return Err(MetricsError::NoPositiveSamples);
            }
            (lo, hi, under)
        }
    };

    let (lo, hi) = if lo == hi {
        match binning {
            Binning::Linear => (lo - 0.5, hi + 0.5),
            Binning::Logarithmic => (lo / 2.0, hi * 2.0),
        }
    } else {
        (lo, hi)
    };

    let mut edges = Vec::with_capacity(n_bins + 1);
    edges.push(lo);
    for k in 1..n_bins {
        let e = match binning {
            Binning::Linear => lo + (hi - lo) * k as f64 / n_bins as f64,
            Binning::Logarithmic => lo * (hi / lo).powf(k as f64 / n_bins as f64),
        };
        edges.push(e);
    }
    edges.push(hi);
    debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));

    let mut counts = vec![0u64; n_bins];
    for &w in wealth {
        if binning == Binning::Logarithmic && w <= 0.0 {
            continue;
        }
        // Right-open bins, last bin right-closed.
        let idx = edges.partition_point(|&e| e <= w);
        let idx = idx.saturating_sub(1).min(n_bins - 1);
        counts[idx] += 1;
    }

    Ok(Histogram {
        binning,
        edges,
        counts,
        underflow,
    })
}

// ── Tail slope ───────────────────────────────────────────────────────────────

/// Least-squares slope of the histogram tail in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSlope {
    pub slope: f64,
    pub std_error: f64,
    pub n_tail_bins: usize,
}

/// Fit the decay of the distribution tail on a logarithmic histogram.
///
/// The fit regresses `ln(count per unit log-wealth)` on `ln(bin center)`
/// over the non-empty bins strictly above the modal bin (first maximal bin
/// on ties). For geometric bins the log-width is constant, so this is the
/// slope of the raw counts in log-log space. Needs at least 3 such bins.
pub fn tail_slope(hist: &Histogram) -> Result<TailSlope, MetricsError> {
    if hist.binning != Binning::Logarithmic {
        return Err(MetricsError::NotLogarithmic);
    }
    let modal = hist
        .counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(k, _)| k)
        .unwrap_or(0);

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in (modal + 1)..hist.n_bins() {
        if hist.counts[k] == 0 {
            continue;
        }
        let log_width = (hist.edges[k + 1] / hist.edges[k]).ln();
        xs.push(hist.center(k).ln());
        ys.push((hist.counts[k] as f64 / log_width).ln());
    }
    let n = xs.len();
    if n < 3 {
        return Err(MetricsError::InsufficientTailBins(n));
    }

    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let std_error = (ssr / (nf - 2.0) / sxx).sqrt();

    Ok(TailSlope {
        slope,
        std_error,
        n_tail_bins: n,
    })
}

// ── Snapshots ────────────────────────────────────────────────────────────────

/// Degeneracies and warnings recorded on a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DegeneracyFlag {
    /// A quantile transfer was skipped because `max(w) <= 0`.
    QuantileMaxNotPositive,
    /// A quantile transfer was skipped because nobody was at or below the
    /// threshold.
    QuantileNoReceivers,
    /// Negative wealth was present when the Gini index was computed; the
    /// value may exceed `(N-1)/N`.
    NegativeWealthGini,
    /// Total wealth was zero; the Gini index is recorded as NaN.
    GiniUndefined,
}

impl DegeneracyFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            DegeneracyFlag::QuantileMaxNotPositive => "q_max_nonpos",
            DegeneracyFlag::QuantileNoReceivers => "q_no_receivers",
            DegeneracyFlag::NegativeWealthGini => "neg_wealth_gini",
            DegeneracyFlag::GiniUndefined => "gini_undefined",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "q_max_nonpos" => Some(DegeneracyFlag::QuantileMaxNotPositive),
            "q_no_receivers" => Some(DegeneracyFlag::QuantileNoReceivers),
            "neg_wealth_gini" => Some(DegeneracyFlag::NegativeWealthGini),
            "gini_undefined" => Some(DegeneracyFlag::GiniUndefined),
            _ => None,
        }
    }
}

/// Time-stamped measurement of a wealth vector.
///
/// `flags` carries the Gini warnings raised at this instant plus any
/// redistribution degeneracies recorded since the previous snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSnapshot {
    pub t: u64,
    pub gini: f64,
    pub total: f64,
    pub max: f64,
    pub min: f64,
    pub neg_fraction: f64,
    pub flags: BTreeSet<DegeneracyFlag>,
}

impl MetricsSnapshot {
    /// Measure a wealth vector at time `t`, folding in flags carried over
    /// from events since the previous snapshot.
    pub fn capture(t: u64, wealth: &[f64], carried: &BTreeSet<DegeneracyFlag>) -> Self {
        let mut flags = carried.clone();
        let gini_value = match gini(wealth) {
            Ok(g) => {
                if g.negative_inputs {
                    flags.insert(DegeneracyFlag::NegativeWealthGini);
                }
                g.value
            }
            Err(_) => {
                flags.insert(DegeneracyFlag::GiniUndefined);
                f64::NAN
            }
        };
        let n = wealth.len() as f64;
        MetricsSnapshot {
            t,
            gini: gini_value,
            total: wealth.iter().sum(),
            max: wealth.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            min: wealth.iter().cloned().fold(f64::INFINITY, f64::min),
            neg_fraction: wealth.iter().filter(|&&w| w < 0.0).count() as f64 / n,
            flags,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent Gini oracle: pairwise mean absolute difference,
    /// `g = sum_{i,j} |w_i - w_j| / (2 N^2 mean)`.
    pub(crate) fn gini_brute_force(wealth: &[f64]) -> f64 {
        let n = wealth.len() as f64;
        let mean = wealth.iter().sum::<f64>() / n;
        let mut acc = 0.0;
        for &a in wealth {
            for &b in wealth {
                acc += (a - b).abs();
            }
        }
        acc / (2.0 * n * n * mean)
    }

    #[test]
    fn gini_equal_wealth_is_zero() {
        let g = gini(&[3.0; 17]).unwrap();
        assert_eq!(g.value, 0.0);
        assert!(!g.negative_inputs);
    }

    #[test]
    fn gini_hand_evaluated() {
        // Oracle: brute force over [1,2,3,4] gives 0.25.
        let w = [1.0, 2.0, 3.0, 4.0];
        assert!((gini_brute_force(&w) - 0.25).abs() < 1e-15);
        let g = gini(&w).unwrap();
        assert!((g.value - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn gini_delta_distribution() {
        // All wealth on one agent: g = (N-1)/N.
        for n in [2usize, 5, 100] {
            let mut w = vec![0.0; n];
            w[n / 2] = 7.5;
            let g = gini(&w).unwrap();
            let want = (n as f64 - 1.0) / n as f64;
            assert!(
                (g.value - want).abs() <= 1e-12,
                "n={n}: got {}, want {want}",
                g.value
            );
        }
    }

    #[test]
    fn gini_rejects_zero_total() {
        assert_eq!(gini(&[0.0, 0.0]).unwrap_err(), MetricsError::ZeroTotalWealth);
        assert_eq!(gini(&[1.0, -1.0]).unwrap_err(), MetricsError::ZeroTotalWealth);
        assert_eq!(gini(&[]).unwrap_err(), MetricsError::EmptyInput);
    }

    #[test]
    fn gini_flags_negative_inputs() {
        let g = gini(&[-1.0, 3.0]).unwrap();
        assert!(g.negative_inputs);
        // Literal formula: sorted [-1, 3], 2*(1*-1 + 2*3)/(2*2) - 3/2 = 1.
        assert!((g.value - 1.0).abs() <= 1e-12);
        assert!(g.value > 0.5, "may exceed (N-1)/N with negatives");
    }

    #[test]
    fn gini_ties_are_order_independent() {
        let a = gini(&[2.0, 1.0, 2.0, 0.5, 2.0]).unwrap().value;
        let b = gini(&[2.0, 2.0, 2.0, 1.0, 0.5]).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn top_share_basics() {
        // Top 1 of 4 agents holds 10/18 of the wealth.
        let s = top_share(&[1.0, 2.0, 5.0, 10.0], 0.01).unwrap();
        assert!((s - 10.0 / 18.0).abs() < 1e-15);
        let s = top_share(&[1.0; 10], 0.2).unwrap();
        assert!((s - 0.2).abs() < 1e-15);
    }

    #[test]
    fn histogram_delta_at_one() {
        let w = vec![1.0; 1000];
        let h = histogram(&w, Binning::Linear, 50).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 1000);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
        assert!(h.edges.windows(2).all(|e| e[0] < e[1]));
    }

    #[test]
    fn histogram_linear_hand_evaluated() {
        let h = histogram(&[1.0, 2.0, 3.0, 4.0], Binning::Linear, 2).unwrap();
        assert_eq!(h.edges, vec![1.0, 2.5, 4.0]);
        assert_eq!(h.counts, vec![2, 2]);
        assert_eq!(h.underflow, 0);
    }

    #[test]
    fn histogram_log_with_underflow() {
        let h = histogram(&[-1.0, 1.0, 10.0, 100.0], Binning::Logarithmic, 2).unwrap();
        assert_eq!(h.underflow, 1);
        assert_eq!(h.edges.len(), 3);
        assert!((h.edges[0] - 1.0).abs() < 1e-12);
        assert!((h.edges[1] - 10.0).abs() < 1e-9);
        assert!((h.edges[2] - 100.0).abs() < 1e-12);
        // Boundary sample 10 belongs to the second (right-closed last) bin,
        // together with 100; total binned = N - underflow.
        assert_eq!(h.counts, vec![1, 2]);
        assert_eq!(h.total_count(), 4);
    }

    #[test]
    fn histogram_rejects_bad_input() {
        assert_eq!(
            histogram(&[], Binning::Linear, 10).unwrap_err(),
            MetricsError::EmptyInput
        );
        assert_eq!(
            histogram(&[1.0], Binning::Linear, 0).unwrap_err(),
            MetricsError::NoBins
        );
        assert_eq!(
            histogram(&[-1.0, 0.0], Binning::Logarithmic, 4).unwrap_err(),
            MetricsError::NoPositiveSamples
        );
    }

    #[test]
    fn histogram_every_sample_binned_once() {
        let w: Vec<f64> = (0..500).map(|k| (k as f64 * 0.618).sin() * 10.0 + 11.0).collect();
        let h = histogram(&w, Binning::Linear, 13).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>() as usize, w.len());
        let h = histogram(&w, Binning::Logarithmic, 13).unwrap();
        assert_eq!(h.total_count() as usize, w.len());
    }

    /// Exact power-law oracle: with counts proportional to center^-2 over
    /// geometric bins, the fitted slope is -2 up to the integer rounding of
    /// the synthetic counts.
    #[test]
    fn tail_slope_recovers_power_law() {
        let n_bins = 12;
        let lo: f64 = 1.0;
        let ratio: f64 = 2.0;
        let mut edges = vec![lo];
        for k in 1..=n_bins {
            edges.push(lo * ratio.powi(k as i32));
        }
        let mut counts = Vec::with_capacity(n_bins);
        // Put the mode in bin 0 so every later bin is a tail bin.
        for k in 0..n_bins {
            let center = (edges[k] * edges[k + 1]).sqrt();
            counts.push((1e12 * center.powi(-2)).round() as u64);
        }
        counts[0] *= 4;
        let hist = Histogram {
            binning: Binning::Logarithmic,
            edges,
            counts,
            underflow: 0,
        };
        let fit = tail_slope(&hist).unwrap();
        assert!(
            (fit.slope + 2.0).abs() < 1e-6,
            "slope {} not close to -2",
            fit.slope
        );
        assert!(fit.std_error < 1e-6);
        assert_eq!(fit.n_tail_bins, n_bins - 1);
    }

    #[test]
    fn tail_slope_flat_counts_give_zero() {
        let edges: Vec<f64> = (0..=10).map(|k| 2.0f64.powi(k)).collect();
        let mut counts = vec![500u64; 10];
        counts[0] = 9000;
        let hist = Histogram {
            binning: Binning::Logarithmic,
            edges,
            counts,
            underflow: 0,
        };
        let fit = tail_slope(&hist).unwrap();
        assert!(fit.slope.abs() < 1e-9, "flat tail should fit slope 0, got {}", fit.slope);
    }

    #[test]
    fn tail_slope_needs_three_tail_bins() {
        let hist = Histogram {
            binning: Binning::Logarithmic,
            edges: vec![1.0, 2.0, 4.0, 8.0],
            counts: vec![100, 10, 5],
            underflow: 0,
        };
        assert_eq!(
            tail_slope(&hist).unwrap_err(),
            MetricsError::InsufficientTailBins(2)
        );
        let linear = Histogram {
            binning: Binning::Linear,
            edges: vec![0.0, 1.0, 2.0],
            counts: vec![1, 1],
            underflow: 0,
        };
        assert_eq!(tail_slope(&linear).unwrap_err(), MetricsError::NotLogarithmic);
    }

    #[test]
    fn snapshot_captures_summary() {
        let snap = MetricsSnapshot::capture(5, &[-1.0, 1.0, 2.0, 6.0], &BTreeSet::new());
        assert_eq!(snap.t, 5);
        assert_eq!(snap.total, 8.0);
        assert_eq!(snap.max, 6.0);
        assert_eq!(snap.min, -1.0);
        assert_eq!(snap.neg_fraction, 0.25);
        assert!(snap.flags.contains(&DegeneracyFlag::NegativeWealthGini));
    }

    #[test]
    fn snapshot_zero_total_records_nan() {
        let snap = MetricsSnapshot::capture(0, &[0.0, 0.0], &BTreeSet::new());
        assert!(snap.gini.is_nan());
        assert!(snap.flags.contains(&DegeneracyFlag::GiniUndefined));
    }
}
