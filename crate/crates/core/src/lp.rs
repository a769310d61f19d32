use crate::channel::{channel_tv, Channel};
use crate::config::Config;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::exponents::{sce_with, ExponentQuery};
use crate::ns::NsStrategy;
use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use serde::Serialize;

/// Outcome of an exact success-probability linear program.
#[derive(Debug, Clone, Serialize)]
pub struct LpReport {
    /// Optimal worst-case success `max min_s (1 - TV)`, in [0, 1].
    pub optimum: f64,
    pub strategy: NsStrategy,
    pub status: String,
    /// Largest violation of the strategy equalities at the solution.
    pub max_residual: f64,
    /// Worst-case TV of the composed channel, recomputed from the strategy.
    pub recomposed_tv: f64,
    pub n_vars: usize,
    pub n_constraints: usize,
}

/// Exact optimum of conversion success over all non-signaling strategies
/// under worst-case TV: `max_N min_s (1 - TV((N o W)_s, t_s))`.
///
/// Formulated with hypograph variables `m_{s,z} <= min((N o W)(z|s), t(z|s))`
/// so the whole problem is linear; at the optimum the `m` saturate the
/// entrywise minimum. `marginal` optionally pins the strategy's input
/// marginal N(x|s) to a fixed distribution for every s.
pub fn ns_success_tv(
    w: &Channel,
    t: &Channel,
    cfg: &Config,
    marginal: Option<&Distribution>,
) -> Result<LpReport> {
    let (nx, ny) = (w.input_size(), w.output_size());
    let (ns, nz) = (t.input_size(), t.output_size());
    if let Some(p) = marginal {
        if p.len() != nx {
            return Err(Error::DimensionMismatch {
                expected: nx,
                got: p.len(),
            });
        }
    }
    let n_table = ns * ny * nx * nz;
    let n_vars = n_table + ns * nz + 1;
    if n_vars > cfg.lp_var_cap {
        return Err(Error::CapExceeded {
            what: "non-signaling LP variables",
            needed: n_vars as u128,
            cap: cfg.lp_var_cap as u128,
        });
    }

    let mut prob = Problem::new(OptimizationDirection::Maximize);
    let idx = |s: usize, y: usize, x: usize, z: usize| ((s * ny + y) * nx + x) * nz + z;
    let nvars: Vec<Variable> = (0..n_table).map(|_| prob.add_var(0.0, (0.0, 1.0))).collect();
    let mvars: Vec<Variable> = (0..ns * nz)
        .map(|k| prob.add_var(0.0, (0.0, t.entry(k / nz, k % nz))))
        .collect();
    let tau = prob.add_var(1.0, (0.0, 1.0));

    let mut n_constraints = 0;
    // normalization per (s, y)
    for s in 0..ns {
        for y in 0..ny {
            let terms: Vec<(Variable, f64)> = (0..nx)
                .flat_map(|x| (0..nz).map(move |z| (x, z)))
                .map(|(x, z)| (nvars[idx(s, y, x, z)], 1.0))
                .collect();
            prob.add_constraint(&terms, ComparisonOp::Eq, 1.0);
            n_constraints += 1;
        }
    }
    // z-marginal independent of s
    for y in 0..ny {
        for z in 0..nz {
            for s in 1..ns {
                let mut terms: Vec<(Variable, f64)> =
                    (0..nx).map(|x| (nvars[idx(s, y, x, z)], 1.0)).collect();
                terms.extend((0..nx).map(|x| (nvars[idx(0, y, x, z)], -1.0)));
                prob.add_constraint(&terms, ComparisonOp::Eq, 0.0);
                n_constraints += 1;
            }
        }
    }
    // x-marginal independent of y
    for s in 0..ns {
        for x in 0..nx {
            for y in 1..ny {
                let mut terms: Vec<(Variable, f64)> =
                    (0..nz).map(|z| (nvars[idx(s, y, x, z)], 1.0)).collect();
                terms.extend((0..nz).map(|z| (nvars[idx(s, 0, x, z)], -1.0)));
                prob.add_constraint(&terms, ComparisonOp::Eq, 0.0);
                n_constraints += 1;
            }
        }
    }
    // optional fixed input marginal, applied at y = 0
    if let Some(p) = marginal {
        for s in 0..ns {
            for x in 0..nx {
                let terms: Vec<(Variable, f64)> =
                    (0..nz).map(|z| (nvars[idx(s, 0, x, z)], 1.0)).collect();
                prob.add_constraint(&terms, ComparisonOp::Eq, p.get(x));
                n_constraints += 1;
            }
        }
    }
    // m_{s,z} <= (N o W)(z|s)
    for s in 0..ns {
        for z in 0..nz {
            let mut terms: Vec<(Variable, f64)> = vec![(mvars[s * nz + z], 1.0)];
            for x in 0..nx {
                for y in 0..ny {
                    let wyx = w.entry(x, y);
                    if wyx != 0.0 {
                        terms.push((nvars[idx(s, y, x, z)], -wyx));
                    }
                }
            }
            prob.add_constraint(&terms, ComparisonOp::Le, 0.0);
            n_constraints += 1;
        }
    }
    // tau <= sum_z m_{s,z}
    for s in 0..ns {
        let mut terms: Vec<(Variable, f64)> = vec![(tau, 1.0)];
        terms.extend((0..nz).map(|z| (mvars[s * nz + z], -1.0)));
        prob.add_constraint(&terms, ComparisonOp::Le, 0.0);
        n_constraints += 1;
    }

    let sol = prob
        .solve()
        .map_err(|e| Error::LpFailure(format!("non-signaling success LP: {e}")))?;
    let optimum = sol[tau].clamp(0.0, 1.0);
    let table: Vec<f64> = (0..n_table).map(|k| sol[nvars[k]].max(0.0)).collect();
    let strategy = NsStrategy::from_table(table, ns, ny, nx, nz)?;
    let max_residual = strategy.residuals().max();
    let recomposed_tv = channel_tv(&strategy.compose(w)?, t)?;
    Ok(LpReport {
        optimum,
        strategy,
        status: "optimal".into(),
        max_residual,
        recomposed_tv,
        n_vars,
        n_constraints,
    })
}

/// Exact optimum of conversion success over shared-randomness strategies:
/// mixtures of deterministic encoder/decoder pairs, with the mixture weights
/// optimized by a linear program over all `|X|^|S| * |Z|^|Y|` pure pairs.
pub fn sr_success_tv(w: &Channel, t: &Channel, cfg: &Config) -> Result<LpReport> {
    let (nx, ny) = (w.input_size(), w.output_size());
    let (ns, nz) = (t.input_size(), t.output_size());
    let n_enc = (nx as u128).checked_pow(ns as u32).ok_or(Error::Overflow {
        what: "encoder count",
    })?;
    let n_dec = (nz as u128).checked_pow(ny as u32).ok_or(Error::Overflow {
        what: "decoder count",
    })?;
    let pairs = n_enc.checked_mul(n_dec).ok_or(Error::Overflow {
        what: "pure pair count",
    })?;
    if pairs > cfg.sr_pair_cap as u128 {
        return Err(Error::CapExceeded {
            what: "shared-randomness pure pairs",
            needed: pairs,
            cap: cfg.sr_pair_cap as u128,
        });
    }
    let pairs = pairs as usize;

    // pure channels C_k(z|s) = sum_{y: d(y)=z} W(y | e(s))
    let encoders: Vec<Vec<usize>> = (0..n_enc as usize)
        .map(|i| crate::channel::unrank(i, nx, ns))
        .collect();
    let decoders: Vec<Vec<usize>> = (0..n_dec as usize)
        .map(|i| crate::channel::unrank(i, nz, ny))
        .collect();
    let mut pure: Vec<Vec<f64>> = Vec::with_capacity(pairs);
    for e in &encoders {
        for d in &decoders {
            let mut c = vec![0.0; ns * nz];
            for s in 0..ns {
                for y in 0..ny {
                    c[s * nz + d[y]] += w.entry(e[s], y);
                }
            }
            pure.push(c);
        }
    }

    let mut prob = Problem::new(OptimizationDirection::Maximize);
    let lambdas: Vec<Variable> = (0..pairs).map(|_| prob.add_var(0.0, (0.0, 1.0))).collect();
    let mvars: Vec<Variable> = (0..ns * nz)
        .map(|k| prob.add_var(0.0, (0.0, t.entry(k / nz, k % nz))))
        .collect();
    let tau = prob.add_var(1.0, (0.0, 1.0));
    let ones: Vec<(Variable, f64)> = lambdas.iter().map(|&v| (v, 1.0)).collect();
    prob.add_constraint(&ones, ComparisonOp::Eq, 1.0);
    let mut n_constraints = 1;
    for s in 0..ns {
        for z in 0..nz {
            let mut terms: Vec<(Variable, f64)> = vec![(mvars[s * nz + z], 1.0)];
            for (k, c) in pure.iter().enumerate() {
                if c[s * nz + z] != 0.0 {
                    terms.push((lambdas[k], -c[s * nz + z]));
                }
            }
            prob.add_constraint(&terms, ComparisonOp::Le, 0.0);
            n_constraints += 1;
        }
    }
    for s in 0..ns {
        let mut terms: Vec<(Variable, f64)> = vec![(tau, 1.0)];
        terms.extend((0..nz).map(|z| (mvars[s * nz + z], -1.0)));
        prob.add_constraint(&terms, ComparisonOp::Le, 0.0);
        n_constraints += 1;
    }
    let sol = prob
        .solve()
        .map_err(|e| Error::LpFailure(format!("shared-randomness success LP: {e}")))?;
    let optimum = sol[tau].clamp(0.0, 1.0);

    // assemble the optimal mixture as a non-signaling strategy
    let mut weighted: Vec<(f64, NsStrategy)> = Vec::new();
    for (k, &lv) in lambdas.iter().enumerate() {
        let wgt = sol[lv];
        if wgt > 1e-12 {
            let e = &encoders[k / decoders.len()];
            let d = &decoders[k % decoders.len()];
            weighted.push((wgt, NsStrategy::pure_pair(ns, ny, nx, nz, e, d)));
        }
    }
    let total: f64 = weighted.iter().map(|(wgt, _)| wgt).sum();
    for (wgt, _) in &mut weighted {
        *wgt /= total;
    }
    let strategy = NsStrategy::mixture(&weighted)?;
    let max_residual = strategy.residuals().max();
    let recomposed_tv = channel_tv(&strategy.compose(w)?, t)?;
    Ok(LpReport {
        optimum,
        strategy,
        status: "optimal".into(),
        max_residual,
        recomposed_tv,
        n_vars: pairs + ns * nz + 1,
        n_constraints,
    })
}

/// The finite-n converse value: the closed-form supremum is a lower bound on
/// `-(1/n) log Succ` at every blocklength, not only asymptotically. Exposed
/// here as the comparison point for the LP optima; it is the same evaluator
/// as the asymptotic exponent.
pub fn converse_bound(q: &ExponentQuery, cfg: &Config) -> Result<f64> {
    Ok(sce_with(q, cfg)?.value_raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::DistanceKind;
    use crate::unit::LogUnit::Bits;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn same_channel_converts_perfectly() {
        let w = Channel::bsc(0.2).unwrap();
        let rep = ns_success_tv(&w, &w, &cfg(), None).unwrap();
        assert!((rep.optimum - 1.0).abs() < 1e-9, "{}", rep.optimum);
        assert!(rep.max_residual < 1e-8);
    }

    #[test]
    fn identity_dilution_is_one_half() {
        let rep = ns_success_tv(&Channel::identity(2), &Channel::identity(4), &cfg(), None).unwrap();
        assert!((rep.optimum - 0.5).abs() < 1e-9, "{}", rep.optimum);
        assert!((rep.recomposed_tv - 0.5).abs() < 1e-8);
    }

    #[test]
    fn surplus_capacity_converts_perfectly() {
        let rep = ns_success_tv(&Channel::identity(4), &Channel::identity(2), &cfg(), None).unwrap();
        assert!((rep.optimum - 1.0).abs() < 1e-9, "{}", rep.optimum);
    }

    #[test]
    fn identity_scaling_two_copies() {
        // id_2^x2 -> id_2^x4, optimum 2^-2... the n = 2 identity scaling case
        let w = Channel::identity(2).product(2, 1 << 24).unwrap();
        let t = Channel::identity(2).product(4, 1 << 24).unwrap();
        let rep = ns_success_tv(&w, &t, &cfg(), None).unwrap();
        assert!((rep.optimum - 0.25).abs() < 1e-8, "{}", rep.optimum);
    }

    #[test]
    fn sr_identity_pair_is_perfect() {
        let rep = sr_success_tv(&Channel::identity(2), &Channel::identity(2), &cfg()).unwrap();
        assert!((rep.optimum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sr_dilution_matches_ns_here() {
        let rep = sr_success_tv(&Channel::identity(2), &Channel::identity(4), &cfg()).unwrap();
        assert!((rep.optimum - 0.5).abs() < 1e-9, "{}", rep.optimum);
    }

    #[test]
    fn sr_useless_channel_best_guess() {
        // BSC(1/2) carries nothing; the best simulation of a perfect bit is a guess
        let rep = sr_success_tv(&Channel::bsc(0.5).unwrap(), &Channel::identity(2), &cfg()).unwrap();
        assert!((rep.optimum - 0.5).abs() < 1e-9, "{}", rep.optimum);
    }

    #[test]
    fn ns_dominates_sr() {
        let mut rng = <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(17);
        for _ in 0..4 {
            let w = crate::sample::random_channel(2, 2, &mut rng);
            let t = crate::sample::random_channel(2, 2, &mut rng);
            let ns = ns_success_tv(&w, &t, &cfg(), None).unwrap();
            let sr = sr_success_tv(&w, &t, &cfg()).unwrap();
            assert!(
                ns.optimum >= sr.optimum - 1e-9,
                "ns {} < sr {}",
                ns.optimum,
                sr.optimum
            );
        }
    }

    #[test]
    fn strategy_feasibility_and_recomposition() {
        let mut rng = <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(31);
        let w = crate::sample::random_channel(2, 2, &mut rng);
        let t = crate::sample::random_channel(2, 2, &mut rng);
        let rep = ns_success_tv(&w, &t, &cfg(), None).unwrap();
        assert!(rep.max_residual <= 1e-8, "residual {}", rep.max_residual);
        assert!(
            ((1.0 - rep.optimum) - rep.recomposed_tv).abs() <= 1e-8,
            "optimum {} vs recomposed tv {}",
            rep.optimum,
            rep.recomposed_tv
        );
    }

    #[test]
    fn fixed_marginal_constrains_the_strategy() {
        let w = Channel::bsc(0.1).unwrap();
        let t = Channel::bsc(0.3).unwrap();
        let p = Distribution::new(vec![0.25, 0.75]).unwrap();
        let rep = ns_success_tv(&w, &t, &cfg(), Some(&p)).unwrap();
        for s in 0..2 {
            let m = rep.strategy.marginal_x(s);
            assert!((m.get(0) - 0.25).abs() < 1e-7, "s={s}: {:?}", m.probs());
        }
        let free = ns_success_tv(&w, &t, &cfg(), None).unwrap();
        assert!(free.optimum >= rep.optimum - 1e-9);
    }

    #[test]
    fn converse_bound_equals_sce_raw() {
        let q = ExponentQuery::new(
            Channel::identity(2),
            Channel::identity(2),
            2.0,
            DistanceKind::Tv,
            Bits,
        )
        .unwrap();
        let cb = converse_bound(&q, &cfg()).unwrap();
        let raw = crate::exponents::sce(&q).unwrap().value_raw;
        assert_eq!(cb, raw);
        assert!((cb - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dpi_consistency_for_returned_strategy() {
        // with the strategy's marginal P_X fixed, replacing W by a constant
        // channel Q_Y can only shrink the Renyi divergence through N
        let mut rng = <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(53);
        let w = crate::sample::random_channel(2, 2, &mut rng);
        let t = crate::sample::random_channel(2, 2, &mut rng);
        let p_x = Distribution::new(vec![0.5, 0.5]).unwrap();
        let rep = ns_success_tv(&w, &t, &cfg(), Some(&p_x)).unwrap();
        let p_s = Distribution::uniform(2);
        for _ in 0..5 {
            let q_y = crate::sample::random_distribution(2, &mut rng);
            let replacer = Channel::from_rows(vec![q_y.probs().to_vec(); 2]).unwrap();
            for alpha in [0.5, 2.0] {
                let lhs = crate::divergence::renyi(
                    &crate::mutual_info::joint_dist(&p_s, &rep.strategy.compose(&w).unwrap())
                        .unwrap(),
                    &crate::mutual_info::joint_dist(&p_s, &rep.strategy.compose(&replacer).unwrap())
                        .unwrap(),
                    alpha,
                    crate::unit::LogUnit::Nats,
                )
                .unwrap();
                // sup_P D_a(PW || P x Q) is attained at a vertex
                let rhs = (0..2)
                    .map(|x| {
                        crate::divergence::renyi_nats(w.row(x), q_y.probs(), alpha)
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(lhs <= rhs + 1e-7, "alpha {alpha}: {lhs} > {rhs}");
            }
        }
    }
}
