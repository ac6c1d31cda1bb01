//! Population-wide redistribution kernels.
//!
//! Both kernels are simultaneous updates evaluated entirely from a frozen
//! snapshot of the wealth vector, and both conserve the total exactly up to
//! floating rounding.
//!
//! - **T** (uniform transfer): every agent gives a fraction `xi` of their
//!   wealth, split equally among the other `N - 1` agents. Implemented
//!   through the algebraic identity
//!   `out_i = (1 - xi*N/(N-1)) * w_i + xi * S/(N-1)` (one pass, O(N)),
//!   which equals the leave-one-out form
//!   `(1-xi)*w_i + xi * (S - w_i)/(N-1)` exactly by algebra.
//! - **Q** (quantile-targeted transfer): agents strictly above the threshold
//!   `max(w)/q` pay `xi` of their wealth; agents at or below it (ties go to
//!   the receiving side) split the collected pool equally.

use thiserror::Error;

/// Redistribution scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// No redistribution.
    None,
    /// Uniform transfer to everyone else.
    Transfer,
    /// Quantile-targeted transfer.
    Quantile,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::Transfer => "T",
            Scheme::Quantile => "Q",
        }
    }
}

/// Static parameters of the redistribution process.
///
/// `q` is meaningful only for [`Scheme::Quantile`]; `t_p` is the period in
/// exchange events between applications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedistributionParams {
    pub scheme: Scheme,
    /// Transfer rate, `0 <= xi <= 1`.
    pub xi: f64,
    /// Period in exchange events, `t_p >= 1`.
    pub t_p: u64,
    /// Quantile divisor, `q >= 1`.
    pub q: u64,
}

impl RedistributionParams {
    pub fn none() -> Self {
        RedistributionParams {
            scheme: Scheme::None,
            xi: 0.0,
            t_p: 1,
            q: 1,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(format!("xi must satisfy 0 <= xi <= 1, got {}", self.xi));
        }
        if self.t_p < 1 {
            return Err("t_p must be >= 1".to_string());
        }
        if self.q < 1 {
            return Err("q must be >= 1".to_string());
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RedistributionError {
    #[error("uniform transfer needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
}

/// Quantile cut of a wealth vector: threshold `max/q`, the receiver count
/// `n_q` (wealth at or below the threshold) and the payer total `s_q`
/// (wealth strictly above it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileStats {
    pub m_max: f64,
    pub threshold: f64,
    pub n_q: usize,
    pub s_q: f64,
}

impl QuantileStats {
    /// The quantile construction presumes a positive maximum; a non-positive
    /// one makes the threshold semantics undefined.
    pub fn degenerate_max(&self) -> bool {
        !(self.m_max > 0.0)
    }
}

/// What a quantile transfer actually did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileOutcome {
    Applied,
    /// `max(w) <= 0`: skipped, vector returned unchanged.
    SkippedMaxNotPositive,
    /// Nobody at or below the threshold: skipped, vector returned unchanged.
    SkippedNoReceivers,
}

impl QuantileOutcome {
    pub fn is_degenerate(self) -> bool {
        self != QuantileOutcome::Applied
    }
}

/// Uniform transfer (T model), simultaneous over the frozen input.
pub fn apply_t(wealth: &[f64], xi: f64) -> Result<Vec<f64>, RedistributionError> {
    let n = wealth.len();
    if n < 2 {
        return Err(RedistributionError::TooFewAgents(n));
    }
    debug_assert!((0.0..=1.0).contains(&xi));
    let total: f64 = wealth.iter().sum();
    let keep = 1.0 - xi * n as f64 / (n - 1) as f64;
    let share = xi * total / (n - 1) as f64;
    Ok(wealth.iter().map(|&w| keep * w + share).collect())
}

/// Quantile statistics of a wealth vector (ties count as receivers).
pub fn quantile_stats(wealth: &[f64], q: u64) -> QuantileStats {
    assert!(!wealth.is_empty(), "quantile_stats needs at least one agent");
    assert!(q >= 1, "quantile divisor must be >= 1");
    let m_max = wealth.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let threshold = m_max / q as f64;
    let mut n_q = 0usize;
    let mut s_q = 0.0f64;
    for &w in wealth {
        if w <= threshold {
            n_q += 1;
        } else {
            s_q += w;
        }
    }
    QuantileStats {
        m_max,
        threshold,
        n_q,
        s_q,
    }
}

/// Quantile-targeted transfer (Q model), simultaneous over the frozen input.
///
/// Degenerate inputs (non-positive maximum, or no receivers at all) leave
/// the vector unchanged and report the reason instead of dividing by zero.
pub fn apply_q(wealth: &[f64], xi: f64, q: u64) -> (Vec<f64>, QuantileOutcome) {
    debug_assert!((0.0..=1.0).contains(&xi));
    let stats = quantile_stats(wealth, q);
    if stats.degenerate_max() {
        return (wealth.to_vec(), QuantileOutcome::SkippedMaxNotPositive);
    }
    if stats.n_q == 0 {
        return (wealth.to_vec(), QuantileOutcome::SkippedNoReceivers);
    }
    let grant = xi * stats.s_q / stats.n_q as f64;
    let out = wealth
        .iter()
        .map(|&w| {
            if w > stats.threshold {
                (1.0 - xi) * w
            } else {
                w + grant
            }
        })
        .collect();
    (out, QuantileOutcome::Applied)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn assert_vec_close(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (k, (g, w)) in got.iter().zip(want).enumerate() {
            assert!((g - w).abs() <= TOL, "index {k}: got {g}, want {w}");
        }
    }

    #[test]
    fn t_hand_evaluated() {
        let out = apply_t(&[0.0, 1.0, 2.0], 0.5).unwrap();
        assert_vec_close(&out, &[0.75, 1.0, 1.25]);
        assert!((out.iter().sum::<f64>() - 3.0).abs() <= TOL);
    }

    #[test]
    fn t_zero_rate_is_identity() {
        let w = [3.0, -1.0, 0.5, 10.0];
        let out = apply_t(&w, 0.0).unwrap();
        assert_vec_close(&out, &w);
    }

    #[test]
    fn t_full_rate_swaps_two_agents() {
        let out = apply_t(&[1.0, 2.0], 1.0).unwrap();
        assert_vec_close(&out, &[2.0, 1.0]);
        let out = apply_t(&[0.1, 0.3], 1.0).unwrap();
        assert_vec_close(&out, &[0.3, 0.1]);
    }

    #[test]
    fn t_equal_input_is_fixed_point() {
        for xi in [0.0, 0.3, 0.7, 1.0] {
            let out = apply_t(&[2.5; 5], xi).unwrap();
            assert_vec_close(&out, &[2.5; 5]);
        }
    }

    #[test]
    fn t_rejects_single_agent() {
        assert_eq!(
            apply_t(&[1.0], 0.5).unwrap_err(),
            RedistributionError::TooFewAgents(1)
        );
    }

    #[test]
    fn quantile_stats_hand_evaluated() {
        let s = quantile_stats(&[1.0, 2.0, 5.0, 10.0], 4);
        assert_eq!(s.m_max, 10.0);
        assert_eq!(s.threshold, 2.5);
        assert_eq!(s.n_q, 2);
        assert_eq!(s.s_q, 15.0);
        assert!(!s.degenerate_max());
    }

    #[test]
    fn quantile_stats_q1_everyone_receives() {
        let s = quantile_stats(&[1.0, 2.0, 5.0, 10.0], 1);
        assert_eq!(s.n_q, 4);
        assert_eq!(s.s_q, 0.0);
        let s = quantile_stats(&[3.0, 3.0, 3.0], 1);
        assert_eq!(s.threshold, 3.0);
        assert_eq!(s.n_q, 3);
        assert_eq!(s.s_q, 0.0);
    }

    #[test]
    fn quantile_stats_flags_non_positive_max() {
        assert!(quantile_stats(&[0.0, -1.0], 4).degenerate_max());
        assert!(quantile_stats(&[-5.0, -2.0], 2).degenerate_max());
        assert!(!quantile_stats(&[-5.0, 0.1], 2).degenerate_max());
    }

    #[test]
    fn q_hand_evaluated_with_reversal() {
        let (out, outcome) = apply_q(&[1.0, 2.0, 5.0, 10.0], 0.5, 4);
        assert_eq!(outcome, QuantileOutcome::Applied);
        // The two payers drop to 2.5 and 5.0; the two receivers jump past them.
        assert_vec_close(&out, &[4.75, 5.75, 2.5, 5.0]);
        assert!((out.iter().sum::<f64>() - 18.0).abs() <= TOL);
    }

    #[test]
    fn q_is_noop_for_q1() {
        let w = [1.0, 2.0, 5.0, 10.0];
        let (out, outcome) = apply_q(&w, 0.7, 1);
        assert_eq!(outcome, QuantileOutcome::Applied);
        assert_eq!(out, w, "nothing strictly exceeds the max");
    }

    #[test]
    fn q_skips_when_no_receivers() {
        let w = [4.0, 4.0, 4.0];
        let (out, outcome) = apply_q(&w, 0.5, 2);
        assert_eq!(outcome, QuantileOutcome::SkippedNoReceivers);
        assert_eq!(out, w);
    }

    #[test]
    fn q_skips_on_non_positive_max() {
        let w = [-1.0, -2.0, 0.0];
        let (out, outcome) = apply_q(&w, 0.5, 3);
        assert_eq!(outcome, QuantileOutcome::SkippedMaxNotPositive);
        assert_eq!(out, w);
    }

    #[test]
    fn q_huge_divisor_on_positive_wealth_degenerates() {
        // Threshold falls below the minimum, so every agent would pay and
        // nobody could receive.
        let w = [1.0, 2.0, 5.0, 10.0];
        let (out, outcome) = apply_q(&w, 0.5, 1_000_000_000);
        assert_eq!(outcome, QuantileOutcome::SkippedNoReceivers);
        assert_eq!(out, w);
    }

    #[test]
    fn q_conserves_total() {
        let w = [0.3, 9.7, 2.2, 5.5, 1.1, 0.0];
        let total: f64 = w.iter().sum();
        let (out, outcome) = apply_q(&w, 0.8, 3);
        assert_eq!(outcome, QuantileOutcome::Applied);
        let new_total: f64 = out.iter().sum();
        assert!(
            ((new_total - total) / total).abs() <= TOL,
            "total drifted: {total} -> {new_total}"
        );
    }
}
