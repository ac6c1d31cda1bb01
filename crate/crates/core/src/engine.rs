//! Run orchestration: the exchange event loop, periodic redistribution,
//! snapshot scheduling, and the parallel ensemble runner.
//!
//! Time is counted in exchange events: one event per unit of `t`, and a
//! redistribution consumes zero time. The ordering at a period boundary is
//! fixed: exchange first, then redistribution (when the resulting `t` is a
//! multiple of `t_p`), then any snapshot due at that `t`. Within a run the
//! event order is strictly sequential so the draw sequence is reproducible;
//! parallelism happens only across runs.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::exchange::{apply_j, apply_l, apply_r, ExchangeDraw, ExchangeParams};
use crate::metrics::{DegeneracyFlag, MetricsSnapshot};
use crate::population::Population;
use crate::redistribution::{apply_q, apply_t, RedistributionParams, Scheme};
use crate::rng::RngStream;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid run config: {0}")]
pub struct InvalidConfig(pub String);

/// Everything a single run needs, minus the ensemble settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub exchange: ExchangeParams,
    pub redistribution: RedistributionParams,
    pub n_agents: usize,
    pub initial_wealth: f64,
    /// Number of exchange events to execute (final `t`).
    pub total_steps: u64,
    /// Sorted, deduplicated times at which to record a snapshot.
    pub snapshot_times: Vec<u64>,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), InvalidConfig> {
        self.exchange.validate().map_err(InvalidConfig)?;
        self.redistribution.validate().map_err(InvalidConfig)?;
        if self.n_agents < 2 {
            return Err(InvalidConfig(format!(
                "n_agents must be >= 2, got {}",
                self.n_agents
            )));
        }
        if !self.initial_wealth.is_finite() {
            return Err(InvalidConfig("initial_wealth must be finite".to_string()));
        }
        if self.snapshot_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(InvalidConfig(
                "snapshot_times must be strictly increasing".to_string(),
            ));
        }
        if let Some(&last) = self.snapshot_times.last() {
            if last > self.total_steps {
                return Err(InvalidConfig(format!(
                    "snapshot time {last} exceeds total_steps {}",
                    self.total_steps
                )));
            }
        }
        Ok(())
    }

    /// FNV-1a hash of the canonical key=value serialization; identifies the
    /// configuration (seed included) in manifests and trajectories.
    pub fn digest(&self) -> String {
        let text = crate::config::serialize_run_config(self);
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in text.bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

/// Default snapshot schedule: 0, then ten log-spaced times per decade up to
/// and including `total_steps`.
pub fn auto_snapshot_times(total_steps: u64) -> Vec<u64> {
    let mut times = vec![0u64];
    if total_steps > 0 {
        times.push(total_steps);
    }
    let mut k = 0u32;
    loop {
        let t = 10f64.powf(k as f64 / 10.0).round() as u64;
        if t > total_steps {
            break;
        }
        times.push(t);
        k += 1;
    }
    times.sort_unstable();
    times.dedup();
    times
}

/// One finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<MetricsSnapshot>,
    pub final_wealth: Vec<f64>,
    pub config_digest: String,
    pub seed: u64,
    /// Redistribution applications over the run.
    pub transfer_count: u64,
    /// How many of those were skipped as degenerate.
    pub degenerate_transfer_count: u64,
}

impl Trajectory {
    /// Gini of the last recorded snapshot.
    pub fn final_gini(&self) -> f64 {
        self.snapshots.last().map(|s| s.gini).unwrap_or(f64::NAN)
    }
}

/// Execute one exchange event in place: sample the draw, apply the model
/// kernel, advance `t` by one.
pub fn step(pop: &mut Population, params: &ExchangeParams, rng: &mut RngStream) {
    let draw = ExchangeDraw::sample(rng, pop.n_agents(), params);
    let (i, j) = draw.pair();
    let (w_i, w_j) = (pop.wealth()[i], pop.wealth()[j]);
    let (out_i, out_j) = match draw {
        ExchangeDraw::Division { epsilon, .. } => apply_r(w_i, w_j, params.lambda, epsilon),
        ExchangeDraw::ProfitLoss { delta, .. } => match params.model {
            crate::exchange::Model::L => apply_l(w_i, w_j, params.lambda, params.rho, delta),
            crate::exchange::Model::J => apply_j(w_i, w_j, params.lambda, delta),
            crate::exchange::Model::R => unreachable!("R model draws a division fraction"),
        },
    };
    pop.commit_exchange(i, j, out_i, out_j);
}

/// Run a full trajectory under `config`.
///
/// Degenerate redistribution applications are recorded (in the next
/// snapshot's flags and in the trajectory counters), never fatal.
pub fn run(config: &RunConfig) -> Result<Trajectory, InvalidConfig> {
    config.validate()?;
    let mut pop = Population::init_uniform(config.n_agents, config.initial_wealth)
        .expect("validated config");
    let mut rng = RngStream::new(config.seed);

    let mut snapshots = Vec::with_capacity(config.snapshot_times.len());
    let mut pending = config.snapshot_times.iter().copied().peekable();
    let mut carried: BTreeSet<DegeneracyFlag> = BTreeSet::new();
    let mut transfer_count = 0u64;
    let mut degenerate_transfer_count = 0u64;

    if pending.peek() == Some(&0) {
        pending.next();
        snapshots.push(MetricsSnapshot::capture(0, pop.wealth(), &carried));
    }

    let redistribute = config.redistribution.scheme != Scheme::None;
    for _ in 0..config.total_steps {
        step(&mut pop, &config.exchange, &mut rng);
        let t = pop.t();

        if redistribute && t % config.redistribution.t_p == 0 {
            transfer_count += 1;
            match config.redistribution.scheme {
                Scheme::Transfer => {
                    let new_wealth = apply_t(pop.wealth(), config.redistribution.xi)
                        .expect("validated config has n_agents >= 2");
                    pop.replace_wealth(new_wealth);
                }
                Scheme::Quantile => {
                    let (new_wealth, outcome) =
                        apply_q(pop.wealth(), config.redistribution.xi, config.redistribution.q);
                    match outcome {
                        crate::redistribution::QuantileOutcome::Applied => {}
                        crate::redistribution::QuantileOutcome::SkippedMaxNotPositive => {
                            degenerate_transfer_count += 1;
                            carried.insert(DegeneracyFlag::QuantileMaxNotPositive);
                        }
                        crate::redistribution::QuantileOutcome::SkippedNoReceivers => {
                            degenerate_transfer_count += 1;
                            carried.insert(DegeneracyFlag::QuantileNoReceivers);
                        }
                    }
                    pop.replace_wealth(new_wealth);
                }
                Scheme::None => unreachable!(),
            }
        }

        if pending.peek() == Some(&t) {
            pending.next();
            snapshots.push(MetricsSnapshot::capture(t, pop.wealth(), &carried));
            carried.clear();
        }
    }

    Ok(Trajectory {
        snapshots,
        final_wealth: pop.wealth().to_vec(),
        config_digest: config.digest(),
        seed: config.seed,
        transfer_count,
        degenerate_transfer_count,
    })
}

/// Seed-ensemble of trajectories sharing one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub per_seed: Vec<Trajectory>,
    /// Snapshot times shared by every member.
    pub snapshot_times: Vec<u64>,
    /// Mean Gini index at each snapshot time.
    pub mean_gini: Vec<f64>,
    /// Sample standard deviation at each snapshot time; `None` for a single
    /// seed, where it is undefined.
    pub std_gini: Option<Vec<f64>>,
}

impl EnsembleResult {
    pub fn final_mean_gini(&self) -> f64 {
        self.mean_gini.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_std_gini(&self) -> Option<f64> {
        self.std_gini.as_ref().and_then(|s| s.last().copied())
    }

    /// Fraction of redistribution applications skipped as degenerate,
    /// pooled over all members.
    pub fn degenerate_rate(&self) -> f64 {
        let total: u64 = self.per_seed.iter().map(|t| t.transfer_count).sum();
        let degenerate: u64 = self
            .per_seed
            .iter()
            .map(|t| t.degenerate_transfer_count)
            .sum();
        if total == 0 {
            0.0
        } else {
            degenerate as f64 / total as f64
        }
    }
}

/// Run `n_seeds` independent trajectories with seeds `base_seed + k`,
/// in parallel, and aggregate the Gini statistics per snapshot time.
///
/// Results are ordered by `k` regardless of completion order, so the output
/// is deterministic for a fixed `(config, n_seeds, base_seed)`.
pub fn run_ensemble(
    config: &RunConfig,
    n_seeds: u32,
    base_seed: u64,
) -> Result<EnsembleResult, InvalidConfig> {
    if n_seeds == 0 {
        return Err(InvalidConfig("ensemble needs n_seeds >= 1".to_string()));
    }
    config.validate()?;

    let per_seed: Vec<Trajectory> = (0..n_seeds as u64)
        .into_par_iter()
        .map(|k| {
            let mut member = config.clone();
            member.seed = base_seed.wrapping_add(k);
            run(&member).expect("validated config")
        })
        .collect();

    let n_snapshots = per_seed[0].snapshots.len();
    let snapshot_times: Vec<u64> = per_seed[0].snapshots.iter().map(|s| s.t).collect();
    let nf = n_seeds as f64;
    let mut mean_gini = Vec::with_capacity(n_snapshots);
    let mut std_gini = Vec::with_capacity(n_snapshots);
    for idx in 0..n_snapshots {
        let mean = per_seed.iter().map(|t| t.snapshots[idx].gini).sum::<f64>() / nf;
        mean_gini.push(mean);
        if n_seeds > 1 {
            let var = per_seed
                .iter()
                .map(|t| {
                    let d = t.snapshots[idx].gini - mean;
                    d * d
                })
                .sum::<f64>()
                / (nf - 1.0);
            std_gini.push(var.sqrt());
        }
    }

    Ok(EnsembleResult {
        per_seed,
        snapshot_times,
        mean_gini,
        std_gini: (n_seeds > 1).then_some(std_gini),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::Model;

    fn base_config(model: Model, total_steps: u64) -> RunConfig {
        RunConfig {
            exchange: ExchangeParams {
                model,
                lambda: 0.25,
                rho: 0.05,
                delta_w: 0.1,
                delta_bias: 0.0,
            },
            redistribution: RedistributionParams::none(),
            n_agents: 100,
            initial_wealth: 1.0,
            total_steps,
            snapshot_times: auto_snapshot_times(total_steps),
            seed: 7,
        }
    }

    #[test]
    fn auto_schedule_contains_decades() {
        let times = auto_snapshot_times(100_000);
        for t in [0u64, 1, 1000, 10_000, 100_000] {
            assert!(times.contains(&t), "{t} missing from schedule");
        }
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        // Ten per decade: between 1e3 and 1e4 exclusive there are 9 interior points.
        let in_decade = times.iter().filter(|&&t| t > 1000 && t < 10_000).count();
        assert_eq!(in_decade, 9);
    }

    #[test]
    fn zero_steps_single_snapshot() {
        let mut config = base_config(Model::R, 0);
        config.n_agents = 1000;
        let traj = run(&config).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        let snap = &traj.snapshots[0];
        assert_eq!(snap.t, 0);
        assert_eq!(snap.gini, 0.0);
        assert_eq!(snap.total, 1000.0);
    }

    /// Replay oracle: with a cloned stream we can pre-draw the (pair, eps)
    /// an R step will consume and hand-trace the kernel.
    #[test]
    fn step_matches_logged_draw() {
        let config = base_config(Model::R, 0);
        let mut pop = Population::init_uniform(2, 1.0).unwrap();
        let mut rng = RngStream::new(123);
        let mut shadow = rng.clone();

        let (i, j) = crate::population::select_pair(&mut shadow, 2);
        let eps = shadow.uniform_unit();
        let expected = apply_r(1.0, 1.0, config.exchange.lambda, eps);

        step(&mut pop, &config.exchange, &mut rng);
        assert_eq!(pop.t(), 1);
        assert_eq!((pop.wealth()[i], pop.wealth()[j]), expected);
    }

    #[test]
    fn j_step_preserves_pair_ratio() {
        let config = base_config(Model::J, 0);
        let mut pop = Population::init_uniform(10, 1.0).unwrap();
        // Make the ratio non-trivial first.
        pop.replace_wealth((1..=10).map(|k| k as f64).collect());
        let before = pop.wealth().to_vec();
        let mut rng = RngStream::new(5);
        let mut shadow = rng.clone();
        let (i, j) = crate::population::select_pair(&mut shadow, 10);
        step(&mut pop, &config.exchange, &mut rng);
        let after = pop.wealth();
        assert_eq!(
            after[i] / after[j],
            before[i] / before[j],
            "touched agents keep their wealth ratio"
        );
    }

    #[test]
    fn r_step_conserves_total() {
        let config = base_config(Model::R, 0);
        let mut pop = Population::init_uniform(50, 1.0).unwrap();
        let mut rng = RngStream::new(99);
        for _ in 0..1000 {
            step(&mut pop, &config.exchange, &mut rng);
            assert!(
                (pop.total_wealth() - 50.0).abs() / 50.0 <= 1e-12,
                "total drifted at t={}",
                pop.t()
            );
        }
    }

    #[test]
    fn run_is_bit_reproducible() {
        let config = base_config(Model::L, 5000);
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        assert_eq!(a, b);
    }

    /// A shorter run is a prefix of a longer one with the same seed: the
    /// snapshot at the shorter horizon must agree bit-for-bit.
    #[test]
    fn shorter_run_is_exact_prefix() {
        let long = run(&base_config(Model::L, 10_000)).unwrap();
        let short = run(&base_config(Model::L, 1000)).unwrap();
        let at_1000 = long.snapshots.iter().find(|s| s.t == 1000).unwrap();
        let short_final = short.snapshots.last().unwrap();
        assert_eq!(at_1000.gini.to_bits(), short_final.gini.to_bits());
        assert_eq!(at_1000.total.to_bits(), short_final.total.to_bits());
        assert_eq!(at_1000.max.to_bits(), short_final.max.to_bits());
    }

    #[test]
    fn redistribution_fires_floor_of_steps_over_period() {
        let mut config = base_config(Model::R, 10_000);
        config.redistribution = RedistributionParams {
            scheme: Scheme::Transfer,
            xi: 0.5,
            t_p: 3000,
            q: 1,
        };
        let traj = run(&config).unwrap();
        assert_eq!(traj.transfer_count, 3); // floor(10000 / 3000)
        assert_eq!(traj.degenerate_transfer_count, 0);
    }

    #[test]
    fn quantile_degeneracies_are_recorded_not_fatal() {
        // Equal wealth plus q >= 2 puts everyone above the threshold at the
        // very first transfer, which must be skipped and flagged.
        let mut config = base_config(Model::J, 10);
        config.exchange.delta_w = 0.0; // J with delta_w = 0 keeps wealth equal
        config.redistribution = RedistributionParams {
            scheme: Scheme::Quantile,
            xi: 0.5,
            t_p: 5,
            q: 2,
        };
        let traj = run(&config).unwrap();
        assert_eq!(traj.transfer_count, 2);
        assert_eq!(traj.degenerate_transfer_count, 2);
        let last = traj.snapshots.last().unwrap();
        assert!(last.flags.contains(&DegeneracyFlag::QuantileNoReceivers));
    }

    #[test]
    fn snapshot_after_redistribution_at_boundary() {
        let mut config = base_config(Model::L, 100);
        config.redistribution = RedistributionParams {
            scheme: Scheme::Transfer,
            xi: 1.0,
            t_p: 100,
            q: 1,
        };
        config.snapshot_times = vec![0, 100];
        let with = run(&config).unwrap();

        let mut config_none = config.clone();
        config_none.redistribution = RedistributionParams::none();
        let without = run(&config_none).unwrap();

        // xi = 1 wipes out per-agent deviations almost entirely, so the
        // snapshot at the boundary must see the post-transfer state.
        let g_with = with.snapshots.last().unwrap().gini;
        let g_without = without.snapshots.last().unwrap().gini;
        assert!(
            g_with < g_without / 10.0,
            "boundary snapshot not post-transfer: {g_with} vs {g_without}"
        );
    }

    #[test]
    fn ensemble_is_deterministic_and_ordered() {
        let config = base_config(Model::R, 2000);
        let a = run_ensemble(&config, 4, 100).unwrap();
        let b = run_ensemble(&config, 4, 100).unwrap();
        assert_eq!(a, b);
        let seeds: Vec<u64> = a.per_seed.iter().map(|t| t.seed).collect();
        assert_eq!(seeds, vec![100, 101, 102, 103]);
    }

    #[test]
    fn single_seed_ensemble_has_no_std() {
        let config = base_config(Model::R, 500);
        let e = run_ensemble(&config, 1, 7).unwrap();
        assert!(e.std_gini.is_none());
        let lone = run(&config).unwrap();
        let gini_seq: Vec<f64> = lone.snapshots.iter().map(|s| s.gini).collect();
        assert_eq!(e.mean_gini, gini_seq);
    }

    #[test]
    fn invalid_configs_are_fatal() {
        let mut config = base_config(Model::R, 100);
        config.exchange.lambda = 1.5;
        assert!(run(&config).is_err());

        let mut config = base_config(Model::R, 100);
        config.snapshot_times = vec![0, 200];
        assert!(run(&config).is_err());

        let mut config = base_config(Model::R, 100);
        config.n_agents = 1;
        assert!(run(&config).is_err());
    }
}
