// Calibration pilot: prints the seed-averaged Gini statistics the acceptance
// suite asserts on, under several sampling conventions relative to the
// transfer period (post-boundary, pre-boundary, mid-period, per-period mean).

use kexsim::engine::{run_ensemble, RunConfig};
use kexsim::exchange::{ExchangeParams, Model};
use kexsim::metrics::{histogram, tail_slope, top_share, Binning};
use kexsim::redistribution::{RedistributionParams, Scheme};

const N: usize = 1000;
const LAMBDA: f64 = 0.25;
const SEEDS: u32 = 10;
const BASE_SEED: u64 = 9000;

fn exchange(model: Model, rho: f64, delta_w: f64) -> ExchangeParams {
    ExchangeParams { model, lambda: LAMBDA, rho, delta_w, delta_bias: 0.0 }
}

fn config(
    params: ExchangeParams,
    redistribution: RedistributionParams,
    total_steps: u64,
    snapshot_times: Vec<u64>,
) -> RunConfig {
    RunConfig {
        exchange: params,
        redistribution,
        n_agents: N,
        initial_wealth: 1.0,
        total_steps,
        snapshot_times,
        seed: BASE_SEED,
    }
}

fn gini_at(ens: &kexsim::engine::EnsembleResult, t: u64) -> (f64, f64) {
    let idx = ens
        .snapshot_times
        .iter()
        .position(|&x| x == t)
        .unwrap_or_else(|| panic!("no snapshot at t={t}"));
    let mean = ens.mean_gini[idx];
    let std = ens.std_gini.as_ref().map(|s| s[idx]).unwrap_or(0.0);
    (mean, std)
}

/// Snapshots needed to evaluate every convention on a multi-period run.
fn period_snapshots(t_p: u64, periods: u64) -> Vec<u64> {
    let mut times = vec![0u64];
    for k in 1..=periods {
        let base = (k - 1) * t_p;
        for j in 1..=10 {
            times.push(base + j * t_p / 10);
        }
        times.push(k * t_p - 1);
    }
    times.sort_unstable();
    times.dedup();
    times
}

struct Conventions {
    post: (f64, f64),
    pre: (f64, f64),
    mid: (f64, f64),
    period_mean: (f64, f64),
}

fn measure(params: ExchangeParams, scheme: Scheme, xi: f64, q: u64, t_p: u64, periods: u64) -> Conventions {
    let total = t_p * periods;
    let cfg = config(
        params,
        RedistributionParams { scheme, xi, t_p, q },
        total,
        period_snapshots(t_p, periods),
    );
    let ens = run_ensemble(&cfg, SEEDS, BASE_SEED).unwrap();
    let post = gini_at(&ens, total);
    let pre = gini_at(&ens, total - 1);
    let mid = gini_at(&ens, total - t_p / 2);
    // Mean over the last period's ten interior sample points.
    let last: Vec<u64> = (1..=10).map(|j| total - t_p + j * t_p / 10).collect();
    let vals: Vec<(f64, f64)> = last.iter().map(|&t| gini_at(&ens, t)).collect();
    let pm = vals.iter().map(|v| v.0).sum::<f64>() / vals.len() as f64;
    let pm_std = vals.iter().map(|v| v.1).sum::<f64>() / vals.len() as f64;
    Conventions { post, pre, mid, period_mean: (pm, pm_std) }
}

fn main() {
    println!("== plain models at t = 1e4 / 1e5 (criteria 4, 5, 6) ==");
    let plain = [
        ("R          ", exchange(Model::R, 0.0, 0.0)),
        ("L rho=0    ", exchange(Model::L, 0.0, 0.1)),
        ("L rho=0.05 ", exchange(Model::L, 0.05, 0.1)),
        ("J dw=0.1   ", exchange(Model::J, 0.0, 0.1)),
        ("J dw=0.2   ", exchange(Model::J, 0.0, 0.2)),
    ];
    for (tag, params) in plain {
        let cfg = config(params, RedistributionParams::none(), 100_000, vec![0, 10_000, 100_000]);
        let ens = run_ensemble(&cfg, SEEDS, BASE_SEED).unwrap();
        let (g4, s4) = gini_at(&ens, 10_000);
        let (g5, s5) = gini_at(&ens, 100_000);
        println!("{tag} g(1e4) = {g4:.4} +- {s4:.4}   g(1e5) = {g5:.4} +- {s5:.4}");
    }

    println!("\n== transfer combos, xi = 0.5 (criterion 7), conventions at 10 periods ==");
    let combos = [
        ("R-T      ", exchange(Model::R, 0.0, 0.0)),
        ("L-T      ", exchange(Model::L, 0.05, 0.1)),
        ("J-T dw.1 ", exchange(Model::J, 0.0, 0.1)),
        ("J-T dw.2 ", exchange(Model::J, 0.0, 0.2)),
    ];
    for t_p in [10_000u64, 100_000] {
        println!("-- t_p = {t_p} --");
        for (tag, params) in combos {
            let c = measure(params, Scheme::Transfer, 0.5, 1, t_p, 10);
            println!(
                "{tag} post {:.3}+-{:.3}  pre {:.3}+-{:.3}  mid {:.3}+-{:.3}  pmean {:.3}+-{:.3}",
                c.post.0, c.post.1, c.pre.0, c.pre.1, c.mid.0, c.mid.1, c.period_mean.0, c.period_mean.1
            );
        }
    }

    println!("\n== criterion 7 protocol A: total = 1e5 exactly (one/ten transfers) ==");
    for t_p in [10_000u64, 100_000] {
        for (tag, params) in combos {
            let cfg = config(
                params,
                RedistributionParams { scheme: Scheme::Transfer, xi: 0.5, t_p, q: 1 },
                100_000,
                vec![0, 99_999, 100_000],
            );
            let ens = run_ensemble(&cfg, SEEDS, BASE_SEED).unwrap();
            let (post, ps) = gini_at(&ens, 100_000);
            let (pre, _) = gini_at(&ens, 99_999);
            println!("tp={t_p} {tag} post(1e5) = {post:.3}+-{ps:.3}  pre(1e5) = {pre:.3}");
        }
    }

    println!("\n== L-T xi sweep, t_p = 1e5, 10 periods (criterion 8) ==");
    for xi in [0.0, 0.1, 0.2, 0.3, 0.5, 0.8] {
        let c = measure(exchange(Model::L, 0.05, 0.1), Scheme::Transfer, xi, 1, 100_000, 10);
        println!(
            "xi={xi:.1}  post {:.3}+-{:.3}  pre {:.3}+-{:.3}  mid {:.3}+-{:.3}  pmean {:.3}+-{:.3}",
            c.post.0, c.post.1, c.pre.0, c.pre.1, c.mid.0, c.mid.1, c.period_mean.0, c.period_mean.1
        );
    }

    println!("\n== L-Q quantile grid vs L-T, t_p = 1e5, xi = 0.5, 10 periods (criterion 9) ==");
    let lt = measure(exchange(Model::L, 0.05, 0.1), Scheme::Transfer, 0.5, 1, 100_000, 10);
    println!(
        "L-T reference: post {:.3} pre {:.3} mid {:.3} pmean {:.3}",
        lt.post.0, lt.pre.0, lt.mid.0, lt.period_mean.0
    );
    for q in [1u64, 2, 4, 5, 6, 8] {
        let c = measure(exchange(Model::L, 0.05, 0.1), Scheme::Quantile, 0.5, q, 100_000, 10);
        println!(
            "q={q}  post {:.3} (d {:+.3})  pre {:.3} (d {:+.3})  mid {:.3} (d {:+.3})  pmean {:.3} (d {:+.3})",
            c.post.0, c.post.0 - lt.post.0,
            c.pre.0, c.pre.0 - lt.pre.0,
            c.mid.0, c.mid.0 - lt.mid.0,
            c.period_mean.0, c.period_mean.0 - lt.period_mean.0
        );
    }

    println!("\n== distribution shape at t = 1e5 (criterion 10) ==");
    let r_cfg = config(exchange(Model::R, 0.0, 0.0), RedistributionParams::none(), 100_000, vec![100_000]);
    let r_ens = run_ensemble(&r_cfg, SEEDS, BASE_SEED).unwrap();
    let l_cfg = config(exchange(Model::L, 0.05, 0.1), RedistributionParams::none(), 100_000, vec![100_000]);
    let l_ens = run_ensemble(&l_cfg, SEEDS, BASE_SEED).unwrap();

    let r_share: f64 = r_ens.per_seed.iter().map(|t| top_share(&t.final_wealth, 0.01).unwrap()).sum::<f64>() / SEEDS as f64;
    let l_share: f64 = l_ens.per_seed.iter().map(|t| top_share(&t.final_wealth, 0.01).unwrap()).sum::<f64>() / SEEDS as f64;
    println!("top-1% share: R {r_share:.4}  L {l_share:.4}  ratio {:.2}", l_share / r_share);

    let pooled_r: Vec<f64> = r_ens.per_seed.iter().flat_map(|t| t.final_wealth.clone()).collect();
    let mean_r = pooled_r.iter().sum::<f64>() / pooled_r.len() as f64;
    for bins in [10usize, 15, 20, 50] {
        let h = histogram(&pooled_r, Binning::Linear, bins).unwrap();
        let modal = h.counts.iter().enumerate().max_by_key(|&(_, &c)| c).unwrap().0;
        println!("R pooled hist {bins} bins: modal bin {modal}, counts {:?}", h.counts);
    }
    println!("R pooled mean = {mean_r:.6}");

    let pooled_l: Vec<f64> = l_ens.per_seed.iter().flat_map(|t| t.final_wealth.clone()).collect();
    for bins in [30usize, 50] {
        let h = histogram(&pooled_l, Binning::Logarithmic, bins).unwrap();
        match tail_slope(&h) {
            Ok(fit) => println!(
                "L pooled log hist {bins} bins: slope {:.3} +- {:.3} over {} bins, underflow {}",
                fit.slope, fit.std_error, fit.n_tail_bins, h.underflow
            ),
            Err(e) => println!("L pooled log hist {bins} bins: tail slope failed: {e}"),
        }
    }
    let neg = pooled_l.iter().filter(|&&w| w < 0.0).count() as f64 / pooled_l.len() as f64;
    println!("L negative fraction at 1e5: {neg:.4}");
}
