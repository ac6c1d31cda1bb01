//! Pairwise exchange kernels.
//!
//! Three update rules, all pure functions of a frozen pre-state and a draw:
//!
//! - **R** (random exchange): both agents save a fraction `lambda` and split
//!   the pooled remainder at a random fraction `epsilon`,
//!   `m_i' = lambda*m_i + epsilon*(1-lambda)*(m_i+m_j)`.
//! - **L** (loan interest): agent `i` borrows, pays interest `rho` on the
//!   lender's stake and absorbs the whole profit/loss `delta*(m_i+m_j)`;
//!   the lender earns riskless interest.
//! - **J** (joint venture): both stakes scale by the same `(1+delta)` factor,
//!   so each agent's outcome is proportional to what they brought in.
//!
//! R conserves the pair total exactly; L and J shift it by
//! `(1-lambda)*delta*(m_i+m_j)` and `(1-lambda)*delta*(m_i+m_j)` respectively
//! (for J, split pro rata). Negative outputs are legal and never clamped.

use crate::rng::RngStream;

/// Exchange rule selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Random exchange of the pooled non-saved wealth.
    R,
    /// Loan interest: borrower pays interest and carries the profit/loss.
    L,
    /// Joint venture: shared profit/loss rate, pro-rata outcome.
    J,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::R => "R",
            Model::L => "L",
            Model::J => "J",
        }
    }
}

/// Static parameters of the exchange process.
///
/// `rho` is ignored by R and J; `delta_w` is ignored by R. `delta_bias`
/// shifts the profit/loss interval to `[-delta_w + bias, delta_w + bias)`
/// at draw time; kernels themselves take the drawn `delta` as-is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeParams {
    pub model: Model,
    /// Savings rate, `0 <= lambda < 1`.
    pub lambda: f64,
    /// Interest rate, `rho >= 0` (L only).
    pub rho: f64,
    /// Half-width of the uniform profit/loss rate, `delta_w >= 0` (L and J).
    pub delta_w: f64,
    /// Additive shift of the profit/loss interval (0 in the baseline runs).
    pub delta_bias: f64,
}

impl ExchangeParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(format!("lambda must satisfy 0 <= lambda < 1, got {}", self.lambda));
        }
        if !self.rho.is_finite() || self.rho < 0.0 {
            return Err(format!("rho must be >= 0, got {}", self.rho));
        }
        if !self.delta_w.is_finite() || self.delta_w < 0.0 {
            return Err(format!("delta_w must be >= 0, got {}", self.delta_w));
        }
        if !self.delta_bias.is_finite() {
            return Err("delta_bias must be finite".to_string());
        }
        Ok(())
    }
}

/// The random draw consumed by one exchange event.
///
/// The draw order is fixed: first `i`, then `j` (re-drawn until distinct),
/// then the single scalar the selected model needs. One event consumes
/// exactly one scalar draw besides the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExchangeDraw {
    /// R-model draw: division fraction `epsilon` in `[0, 1)`.
    Division { pair: (usize, usize), epsilon: f64 },
    /// L/J-model draw: profit/loss rate `delta` in
    /// `[-delta_w + bias, delta_w + bias)`.
    ProfitLoss { pair: (usize, usize), delta: f64 },
}

impl ExchangeDraw {
    /// Sample the draw for one event under `params`.
    pub fn sample(rng: &mut RngStream, n_agents: usize, params: &ExchangeParams) -> Self {
        let pair = crate::population::select_pair(rng, n_agents);
        match params.model {
            Model::R => ExchangeDraw::Division {
                pair,
                epsilon: rng.uniform_unit(),
            },
            Model::L | Model::J => ExchangeDraw::ProfitLoss {
                pair,
                delta: sample_delta(rng, params.delta_w, params.delta_bias),
            },
        }
    }

    pub fn pair(&self) -> (usize, usize) {
        match *self {
            ExchangeDraw::Division { pair, .. } | ExchangeDraw::ProfitLoss { pair, .. } => pair,
        }
    }
}

/// `delta = delta_w * (2u - 1) + bias` with `u` uniform in `[0, 1)`.
#[inline]
pub fn sample_delta(rng: &mut RngStream, delta_w: f64, bias: f64) -> f64 {
    delta_w * (2.0 * rng.uniform_unit() - 1.0) + bias
}

/// Random exchange (R): pool the non-saved wealth, split at `epsilon`.
///
/// Conserves `m_i + m_j` up to floating rounding.
#[inline]
pub fn apply_r(m_i: f64, m_j: f64, lambda: f64, epsilon: f64) -> (f64, f64) {
    let pool = (1.0 - lambda) * (m_i + m_j);
    (
        lambda * m_i + epsilon * pool,
        lambda * m_j + (1.0 - epsilon) * pool,
    )
}

/// Loan interest (L): `i` borrows, `j` lends.
///
/// The borrower pays interest `(1-lambda)*rho*m_j` and absorbs the full
/// profit/loss `(1-lambda)*delta*(m_i+m_j)`; the lender collects the
/// interest risk-free. Pair total changes by exactly
/// `(1-lambda)*delta*(m_i+m_j)` up to rounding.
#[inline]
pub fn apply_l(m_i: f64, m_j: f64, lambda: f64, rho: f64, delta: f64) -> (f64, f64) {
    let keep = 1.0 - lambda;
    (
        lambda * m_i + keep * (m_i - rho * m_j + delta * (m_i + m_j)),
        lambda * m_j + keep * (1.0 + rho) * m_j,
    )
}

/// Joint venture (J): both stakes scale by the same factor.
///
/// Each output is `input * (1 + (1-lambda)*delta)`; the factor is computed
/// once so the wealth ratio of the pair is preserved exactly.
#[inline]
pub fn apply_j(m_i: f64, m_j: f64, lambda: f64, delta: f64) -> (f64, f64) {
    let factor = joint_factor(lambda, delta);
    (m_i * factor, m_j * factor)
}

/// The common J-model scale factor `1 + (1-lambda)*delta`.
#[inline]
pub fn joint_factor(lambda: f64, delta: f64) -> f64 {
    1.0 + (1.0 - lambda) * delta
}
