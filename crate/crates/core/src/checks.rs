use crate::capacity::capacity_ext_nats;
use crate::config::Config;
use crate::dist::Distribution;
use crate::divergence::{dmax_smooth, fidelity, kl, renyi, tv};
use crate::error::Result;
use crate::mutual_info::augustin;
use crate::sample::{random_channel, random_distribution, random_stochastic_map};
use crate::unit::LogUnit::Nats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

/// Slack tolerated before an inequality counts as violated.
pub const SUITE_SLACK: f64 = 1e-8;

/// First violated instance of a lemma suite, with the inputs serialized for
/// reproduction.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub suite: String,
    pub trial: usize,
    pub shortfall: f64,
    pub detail: String,
    pub inputs: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    /// Worst shortfall observed (negative means the inequality held with
    /// margin everywhere).
    pub worst_shortfall: f64,
}

#[derive(Debug)]
pub enum SuiteOutcome {
    Passed(SuiteReport),
    Violated(Box<Violation>),
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, SuiteOutcome::Passed(_))
    }
}

pub const SUITES: &[&str] = &[
    "reverse-chernoff",
    "smooth-max-iid",
    "fidelity-kl",
    "dpi",
    "concavity",
];

/// Runs one named lemma suite for `trials` randomized instances.
pub fn run_suite(name: &str, trials: usize, seed: u64, cfg: &Config) -> Result<SuiteOutcome> {
    match name {
        "reverse-chernoff" => reverse_chernoff_suite(trials, seed, cfg),
        "smooth-max-iid" => smooth_max_iid_suite(trials, seed, cfg),
        "fidelity-kl" => fidelity_kl_suite(trials, seed),
        "dpi" => dpi_suite(trials, seed),
        "concavity" => concavity_suite(trials, seed, cfg),
        other => Err(crate::error::Error::Parse(format!(
            "unknown suite '{other}', expected one of {SUITES:?}"
        ))),
    }
}

fn outcome(
    suite: &str,
    trials: usize,
    worst: f64,
    first: Option<Box<Violation>>,
) -> SuiteOutcome {
    match first {
        Some(v) => SuiteOutcome::Violated(v),
        None => SuiteOutcome::Passed(SuiteReport {
            suite: suite.into(),
            trials,
            worst_shortfall: worst,
        }),
    }
}

/// `sum min(P,Q) >= (1-2 eta) inf_alpha exp(-a Dmax^eta(V||P) - (1-a) Dmax^eta(V||Q))`
/// over an alpha grid reaching both endpoints.
fn reverse_chernoff_suite(trials: usize, seed: u64, cfg: &Config) -> Result<SuiteOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let suite = "reverse-chernoff";
    for trial in 0..trials {
        let k = rng.gen_range(2..=6);
        let p = random_distribution(k, &mut rng);
        let q = random_distribution(k, &mut rng);
        let v = random_distribution(k, &mut rng);
        let eta = rng.gen_range(0.01..0.45);
        let lhs: f64 = p
            .probs()
            .iter()
            .zip(q.probs())
            .map(|(&a, &b)| a.min(b))
            .sum();
        let da = dmax_smooth(&v, &p, eta, Nats, cfg.bisect_tol, cfg.bisect_max_iters)?;
        let db = dmax_smooth(&v, &q, eta, Nats, cfg.bisect_tol, cfg.bisect_max_iters)?;
        let mut inf = f64::INFINITY;
        let mut grid: Vec<f64> = (1..32).map(|i| i as f64 / 32.0).collect();
        grid.push(1e-9);
        grid.push(1.0 - 1e-9);
        for a in grid {
            inf = inf.min((-a * da - (1.0 - a) * db).exp());
        }
        let rhs = (1.0 - 2.0 * eta) * inf;
        let shortfall = rhs - lhs;
        worst = worst.max(shortfall);
        if shortfall > SUITE_SLACK {
            return Ok(outcome(
                suite,
                trials,
                worst,
                Some(Box::new(Violation {
                    suite: suite.into(),
                    trial,
                    shortfall,
                    detail: format!("sum min = {lhs:.9} < bound {rhs:.9} (eta {eta:.4})"),
                    inputs: serde_json::json!({
                        "p": p.probs(), "q": q.probs(), "v": v.probs(), "eta": eta
                    }),
                })),
            ));
        }
    }
    Ok(outcome(suite, trials, worst, None))
}

/// `Dmax^eta(p^n || q^n) <= n D_{1+1/sqrt(n)}(p||q) + sqrt(n) g(eta)` with
/// `g(eta) = -log(1 - sqrt(1 - eta^2))`, for n in {1, 2, 4, 8}.
fn smooth_max_iid_suite(trials: usize, seed: u64, cfg: &Config) -> Result<SuiteOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let suite = "smooth-max-iid";
    for trial in 0..trials {
        let p = random_distribution(2, &mut rng);
        let q = random_distribution(2, &mut rng);
        let eta: f64 = rng.gen_range(0.05..0.45);
        let g_eta = -(1.0 - (1.0 - eta * eta).sqrt()).ln();
        for n in [1usize, 2, 4, 8] {
            let nf = n as f64;
            let alpha = 1.0 + 1.0 / nf.sqrt();
            let pn = p.product(n, cfg.product_entry_cap)?;
            let qn = q.product(n, cfg.product_entry_cap)?;
            let lhs = dmax_smooth(&pn, &qn, eta, Nats, cfg.bisect_tol, cfg.bisect_max_iters)?;
            let rhs = nf * renyi(&p, &q, alpha, Nats)? + nf.sqrt() * g_eta;
            let shortfall = lhs - rhs;
            worst = worst.max(shortfall);
            if shortfall > SUITE_SLACK {
                return Ok(outcome(
                    suite,
                    trials,
                    worst,
                    Some(Box::new(Violation {
                        suite: suite.into(),
                        trial,
                        shortfall,
                        detail: format!("n = {n}: Dmax^eta = {lhs:.9} > bound {rhs:.9}"),
                        inputs: serde_json::json!({
                            "p": p.probs(), "q": q.probs(), "eta": eta, "n": n
                        }),
                    })),
                ));
            }
        }
    }
    Ok(outcome(suite, trials, worst, None))
}

/// `-log F(p, q) <= D(v||p) + D(v||q)`.
fn fidelity_kl_suite(trials: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let suite = "fidelity-kl";
    for trial in 0..trials {
        let k = rng.gen_range(2..=6);
        let p = random_distribution(k, &mut rng);
        let q = random_distribution(k, &mut rng);
        let v = random_distribution(k, &mut rng);
        let lhs = -fidelity(&p, &q)?.ln();
        let rhs = kl(&v, &p, Nats)? + kl(&v, &q, Nats)?;
        let shortfall = lhs - rhs;
        worst = worst.max(shortfall);
        if shortfall > SUITE_SLACK {
            return Ok(outcome(
                suite,
                trials,
                worst,
                Some(Box::new(Violation {
                    suite: suite.into(),
                    trial,
                    shortfall,
                    detail: format!("-log F = {lhs:.9} > {rhs:.9}"),
                    inputs: serde_json::json!({"p": p.probs(), "q": q.probs(), "v": v.probs()}),
                })),
            ));
        }
    }
    Ok(outcome(suite, trials, worst, None))
}

/// Data processing for KL and Renyi divergences under random stochastic
/// post-processing maps.
fn dpi_suite(trials: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let suite = "dpi";
    for trial in 0..trials {
        let k = rng.gen_range(2..=6);
        let j = rng.gen_range(2..=6);
        let p = random_distribution(k, &mut rng);
        let q = random_distribution(k, &mut rng);
        let m = random_stochastic_map(k, j, &mut rng);
        let mp = m.push_forward(&p)?;
        let mq = m.push_forward(&q)?;
        let mut fail: Option<(f64, String)> = None;
        let kl_in = kl(&p, &q, Nats)?;
        let kl_out = kl(&mp, &mq, Nats)?;
        if kl_out - kl_in > SUITE_SLACK {
            fail = Some((kl_out - kl_in, format!("KL: {kl_out:.9} > {kl_in:.9}")));
        }
        worst = worst.max(kl_out - kl_in);
        for _ in 0..50 {
            let a = loop {
                let cand: f64 = rng.gen_range(0.05..3.0);
                if (cand - 1.0).abs() > 1e-3 {
                    break cand;
                }
            };
            let r_in = renyi(&p, &q, a, Nats)?;
            let r_out = renyi(&mp, &mq, a, Nats)?;
            worst = worst.max(r_out - r_in);
            if r_out - r_in > SUITE_SLACK && fail.is_none() {
                fail = Some((r_out - r_in, format!("Renyi({a:.4}): {r_out:.9} > {r_in:.9}")));
            }
        }
        if let Some((shortfall, detail)) = fail {
            return Ok(outcome(
                suite,
                trials,
                worst,
                Some(Box::new(Violation {
                    suite: suite.into(),
                    trial,
                    shortfall,
                    detail,
                    inputs: serde_json::json!({
                        "p": p.probs(), "q": q.probs(),
                        "map_rows": m.rows().collect::<Vec<_>>()
                    }),
                })),
            ));
        }
    }
    Ok(outcome(suite, trials, worst, None))
}

/// Midpoint concavity of the two auxiliary maps behind the variational
/// minimax swaps, on a triangular grid over {0 <= delta <= alpha <= 1}:
///
///   f(alpha, delta) = delta * C_{(1-alpha)/(1+delta-alpha)}(T)
///   g(alpha, delta) = -delta * I^ac_{alpha/(alpha-delta)}(P_X, W)
fn concavity_suite(trials: usize, seed: u64, cfg: &Config) -> Result<SuiteOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let suite = "concavity";
    let steps = 12usize;
    for trial in 0..trials {
        let nin = rng.gen_range(2..=3);
        let nout = rng.gen_range(2..=3);
        let t = random_channel(nin, nout, &mut rng);
        let w = random_channel(nin, nout, &mut rng);
        let p_x = random_distribution(nin, &mut rng);

        // interior grid in units of 1/steps
        let mut f_vals = std::collections::HashMap::new();
        let mut g_vals = std::collections::HashMap::new();
        let mut points = Vec::new();
        for ai in 2..steps {
            for di in 1..ai {
                points.push((ai, di));
            }
        }
        for &(ai, di) in &points {
            let alpha = ai as f64 / steps as f64;
            let delta = di as f64 / steps as f64;
            let t_order = (1.0 - alpha) / (1.0 + delta - alpha);
            let w_order = alpha / (alpha - delta);
            let f = delta * capacity_ext_nats(&t, t_order, cfg)?;
            let g = -delta
                * augustin(&p_x, &w, w_order, Nats, cfg.fixed_point_tol, cfg.fixed_point_max_iters)?
                    .value;
            f_vals.insert((ai, di), f);
            g_vals.insert((ai, di), g);
        }
        for (idx_a, &(a1, d1)) in points.iter().enumerate() {
            for &(a2, d2) in points.iter().skip(idx_a + 1) {
                if (a1 + a2) % 2 != 0 || (d1 + d2) % 2 != 0 {
                    continue;
                }
                let mid = ((a1 + a2) / 2, (d1 + d2) / 2);
                if !f_vals.contains_key(&mid) {
                    continue;
                }
                for (name, vals) in [("f", &f_vals), ("g", &g_vals)] {
                    let lhs = 0.5 * (vals[&(a1, d1)] + vals[&(a2, d2)]);
                    let rhs = vals[&mid];
                    let shortfall = lhs - rhs;
                    worst = worst.max(shortfall);
                    if shortfall > SUITE_SLACK {
                        return Ok(outcome(
                            suite,
                            trials,
                            worst,
                            Some(Box::new(Violation {
                                suite: suite.into(),
                                trial,
                                shortfall,
                                detail: format!(
                                    "{name} fails midpoint concavity between {:?} and {:?}",
                                    (a1, d1),
                                    (a2, d2)
                                ),
                                inputs: serde_json::json!({
                                    "t_rows": t.rows().collect::<Vec<_>>(),
                                    "w_rows": w.rows().collect::<Vec<_>>(),
                                    "p_x": p_x.probs(),
                                    "steps": steps
                                }),
                            })),
                        ));
                    }
                }
            }
        }
    }
    Ok(outcome(suite, trials, worst, None))
}

/// Total-variation sanity relation used by the round-trip tests:
/// `1 - sum min(P,Q) = TV(P,Q)`.
pub fn tv_min_identity(p: &Distribution, q: &Distribution) -> Result<f64> {
    let smin: f64 = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(&a, &b)| a.min(b))
        .sum();
    Ok((1.0 - smin - tv(p, q)?).abs())
}
