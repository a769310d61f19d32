use crate::capacity::capacity_ext_nats;
use crate::channel::Channel;
use crate::config::Config;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::unit::LogUnit;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Distance notion for the conversion success functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Tv,
    Pur,
    /// Renyi-based measure of the given order in (0, 1).
    Renyi(f64),
}

impl DistanceKind {
    pub fn label(&self) -> String {
        match self {
            DistanceKind::Tv => "tv".into(),
            DistanceKind::Pur => "pur".into(),
            DistanceKind::Renyi(a) => format!("renyi({a})"),
        }
    }
}

/// Grid controls for the exponent supremum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub coarse: usize,
    pub refine_rounds: usize,
    pub inset: f64,
}

impl GridSpec {
    pub fn from_config(cfg: &Config) -> Self {
        GridSpec {
            coarse: cfg.grid_coarse,
            refine_rounds: cfg.grid_refine_rounds,
            inset: cfg.grid_inset,
        }
    }
}

/// A strong-converse-exponent query: convert `w`-uses into `t`-copies at
/// `rate` target copies per use, measured in `distance`.
#[derive(Debug, Clone)]
pub struct ExponentQuery {
    pub w: Channel,
    pub t: Channel,
    pub rate: f64,
    pub distance: DistanceKind,
    pub grid: GridSpec,
    pub unit: LogUnit,
    /// Restrict the TV optimization to a single alpha (the alpha = 1/2 slice
    /// reproduces the purified exponent up to a factor of 2).
    pub alpha_fixed: Option<f64>,
}

impl ExponentQuery {
    pub fn new(w: Channel, t: Channel, rate: f64, distance: DistanceKind, unit: LogUnit) -> Result<Self> {
        if rate < 0.0 {
            return Err(Error::DomainViolation {
                name: "rate",
                value: rate,
                domain: "r >= 0",
            });
        }
        if let DistanceKind::Renyi(a) = distance {
            if !(0.0 < a && a < 1.0) {
                return Err(Error::DomainViolation {
                    name: "renyi order",
                    value: a,
                    domain: "(0, 1)",
                });
            }
        }
        Ok(ExponentQuery {
            w,
            t,
            rate,
            distance,
            grid: GridSpec::from_config(&Config::default()),
            unit,
            alpha_fixed: None,
        })
    }
}

/// Refinement trace kept as a diagnostic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefineTrace {
    pub coarse_value: f64,
    pub round_values: Vec<f64>,
    pub evaluations: usize,
}

/// Value of a strong-converse-exponent optimization, per channel use.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentResult {
    pub value_raw: f64,
    pub clamped: f64,
    pub argmax_alpha: f64,
    pub argmax_p: f64,
    pub distance: String,
    pub rate: f64,
    pub unit: LogUnit,
    pub trace: RefineTrace,
}

impl ExponentResult {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.rate, self.distance, self.value_raw, self.clamped, self.argmax_alpha, self.argmax_p
        )
    }

    pub fn csv_header() -> &'static str {
        "r,distance,raw,clamped,argmax_alpha,argmax_p"
    }
}

/// Memoized Renyi capacities of one channel over the closed order range.
struct CapCache<'a> {
    w: &'a Channel,
    cfg: &'a Config,
    map: HashMap<u64, f64>,
}

impl<'a> CapCache<'a> {
    fn new(w: &'a Channel, cfg: &'a Config) -> Self {
        CapCache {
            w,
            cfg,
            map: HashMap::new(),
        }
    }

    fn get(&mut self, order: f64) -> Result<f64> {
        let key = order.to_bits();
        if let Some(&v) = self.map.get(&key) {
            return Ok(v);
        }
        let v = capacity_ext_nats(self.w, order, self.cfg)?;
        self.map.insert(key, v);
        Ok(v)
    }
}

/// The theorem objective at a single interior point, in the query's unit.
///
/// TV: coefficient `(1-p+ap)/p`, orders `(1-a)p` for T and `ap/(p-1)` for W.
/// PUR: coefficient `(2-p)/p`, orders `p/2` and `p/(2(p-1))`.
/// Renyi(a): coefficient `(1-ap)/((1-a)p)`, orders `ap` and `(1-a)p/(p-1)`.
pub fn inner_objective(alpha: f64, p: f64, q: &ExponentQuery) -> Result<f64> {
    let cfg = Config::default();
    let (coeff, t_order, w_order) = match q.distance {
        DistanceKind::Tv => {
            if !(0.0 < alpha && alpha < 1.0) {
                return Err(Error::DomainViolation {
                    name: "alpha",
                    value: alpha,
                    domain: "(0, 1)",
                });
            }
            if !(1.0 < p && p < 1.0 / (1.0 - alpha)) {
                return Err(Error::DomainViolation {
                    name: "p",
                    value: p,
                    domain: "(1, 1/(1-alpha))",
                });
            }
            (
                (1.0 - p + alpha * p) / p,
                (1.0 - alpha) * p,
                alpha * p / (p - 1.0),
            )
        }
        DistanceKind::Pur => {
            if !(1.0 < p && p < 2.0) {
                return Err(Error::DomainViolation {
                    name: "p",
                    value: p,
                    domain: "(1, 2)",
                });
            }
            ((2.0 - p) / p, p / 2.0, p / (2.0 * (p - 1.0)))
        }
        DistanceKind::Renyi(a) => {
            if !(1.0 < p && p < 1.0 / a) {
                return Err(Error::DomainViolation {
                    name: "p",
                    value: p,
                    domain: "(1, 1/alpha)",
                });
            }
            (
                (1.0 - a * p) / ((1.0 - a) * p),
                a * p,
                (1.0 - a) * p / (p - 1.0),
            )
        }
    };
    let it = capacity_ext_nats(&q.t, t_order, &cfg)?;
    let iw = capacity_ext_nats(&q.w, w_order, &cfg)?;
    Ok(q.unit.from_nats(coeff * (q.rate * it - iw)))
}

/// Strong converse exponent: supremum of the theorem objective over its
/// domain. The optimization runs over transformed coordinates on the closed
/// domain (boundary orders 0, 1 and infinity evaluated through the extended
/// capacity), so boundary suprema such as the identity-channel corner are
/// reached exactly.
pub fn sce(q: &ExponentQuery) -> Result<ExponentResult> {
    sce_with(q, &Config::default())
}

pub fn sce_with(q: &ExponentQuery, cfg: &Config) -> Result<ExponentResult> {
    match q.distance {
        DistanceKind::Tv => sce_tv(q, cfg),
        DistanceKind::Pur => sce_line(q, cfg, 0.5, LineKind::Pur),
        DistanceKind::Renyi(a) => sce_line(q, cfg, a, LineKind::Renyi),
    }
}

/// TV optimization over (alpha, delta) with delta = 1/p - (1 - alpha),
/// i.e. the triangle 0 <= delta <= alpha <= 1. The objective there is
/// `delta * (r * C_T((1-a)/(1+d-a)) - C_W(a/(a-d)))`.
fn sce_tv(q: &ExponentQuery, cfg: &Config) -> Result<ExponentResult> {
    let mut cache_w = CapCache::new(&q.w, cfg);
    let mut cache_t = CapCache::new(&q.t, cfg);
    let mut evals = 0usize;
    let r = q.rate;
    let mut eval = |alpha: f64, delta: f64| -> Result<f64> {
        evals += 1;
        if delta <= 0.0 || alpha <= 0.0 {
            return Ok(0.0);
        }
        let t_order = (1.0 - alpha) / (1.0 + delta - alpha);
        let w_order = if delta >= alpha {
            f64::INFINITY
        } else {
            alpha / (alpha - delta)
        };
        Ok(delta * (r * cache_t.get(t_order)? - cache_w.get(w_order)?))
    };

    let g = q.grid.coarse.max(4);
    let mut best = f64::NEG_INFINITY;
    let mut best_at = (0.0, 0.0);
    let alphas: Vec<f64> = match q.alpha_fixed {
        Some(a) => vec![a],
        None => (0..=g).map(|i| i as f64 / g as f64).collect(),
    };
    for &alpha in &alphas {
        for j in 0..=g {
            let delta = alpha * j as f64 / g as f64;
            let v = eval(alpha, delta)?;
            if v > best {
                best = v;
                best_at = (alpha, delta);
            }
        }
    }
    let coarse_value = best;
    let mut round_values = Vec::new();
    let mut half_a = 1.0 / g as f64;
    let mut half_d = 1.0 / g as f64;
    for _ in 0..q.grid.refine_rounds {
        let fine = 16usize;
        let (ca, cd) = best_at;
        for i in 0..=fine {
            let alpha = match q.alpha_fixed {
                Some(a) => a,
                None => (ca - half_a + 2.0 * half_a * i as f64 / fine as f64).clamp(0.0, 1.0),
            };
            for j in 0..=fine {
                let delta = (cd - half_d + 2.0 * half_d * j as f64 / fine as f64)
                    .clamp(0.0, alpha);
                let v = eval(alpha, delta)?;
                if v > best {
                    best = v;
                    best_at = (alpha, delta);
                }
            }
            if q.alpha_fixed.is_some() && i == 0 {
                // alpha is pinned; the i-loop adds nothing further
            }
        }
        round_values.push(best);
        half_a /= 8.0;
        half_d /= 8.0;
    }
    let (alpha, delta) = best_at;
    Ok(ExponentResult {
        value_raw: q.unit.from_nats(best),
        clamped: q.unit.from_nats(best.max(0.0)),
        argmax_alpha: alpha,
        argmax_p: 1.0 / (1.0 + delta - alpha),
        distance: q.distance.label(),
        rate: q.rate,
        unit: q.unit,
        trace: RefineTrace {
            coarse_value: q.unit.from_nats(coarse_value),
            round_values: round_values.iter().map(|&v| q.unit.from_nats(v)).collect(),
            evaluations: evals,
        },
    })
}

enum LineKind {
    Pur,
    Renyi,
}

/// One-dimensional suprema (purified and Renyi distances) over u = 1/p.
fn sce_line(q: &ExponentQuery, cfg: &Config, a: f64, kind: LineKind) -> Result<ExponentResult> {
    let mut cache_w = CapCache::new(&q.w, cfg);
    let mut cache_t = CapCache::new(&q.t, cfg);
    let mut evals = 0usize;
    let r = q.rate;
    let u_lo = match kind {
        LineKind::Pur => 0.5,
        LineKind::Renyi => a,
    };
    let mut eval = |u: f64| -> Result<f64> {
        evals += 1;
        let u = u.clamp(u_lo, 1.0);
        let (coeff, t_order, w_order) = match kind {
            LineKind::Pur => (
                2.0 * u - 1.0,
                1.0 / (2.0 * u),
                if u >= 1.0 { f64::INFINITY } else { 1.0 / (2.0 * (1.0 - u)) },
            ),
            LineKind::Renyi => (
                (u - a) / (1.0 - a),
                a / u,
                if u >= 1.0 { f64::INFINITY } else { (1.0 - a) / (1.0 - u) },
            ),
        };
        if coeff <= 0.0 {
            return Ok(0.0);
        }
        Ok(coeff * (r * cache_t.get(t_order)? - cache_w.get(w_order)?))
    };
    let g = (q.grid.coarse * q.grid.coarse / 4).max(64);
    let mut best = f64::NEG_INFINITY;
    let mut best_u = u_lo;
    for i in 0..=g {
        let u = u_lo + (1.0 - u_lo) * i as f64 / g as f64;
        let v = eval(u)?;
        if v > best {
            best = v;
            best_u = u;
        }
    }
    let coarse_value = best;
    let mut round_values = Vec::new();
    let mut half = (1.0 - u_lo) / g as f64;
    for _ in 0..q.grid.refine_rounds {
        let fine = 32;
        let c = best_u;
        for i in 0..=fine {
            let u = c - half + 2.0 * half * i as f64 / fine as f64;
            let v = eval(u)?;
            if v > best {
                best = v;
                best_u = u;
            }
        }
        round_values.push(best);
        half /= 8.0;
    }
    let argmax_alpha = match kind {
        LineKind::Pur => 0.5,
        LineKind::Renyi => a,
    };
    Ok(ExponentResult {
        value_raw: q.unit.from_nats(best),
        clamped: q.unit.from_nats(best.max(0.0)),
        argmax_alpha,
        argmax_p: 1.0 / best_u,
        distance: q.distance.label(),
        rate: q.rate,
        unit: q.unit,
        trace: RefineTrace {
            coarse_value: q.unit.from_nats(coarse_value),
            round_values: round_values.iter().map(|&v| q.unit.from_nats(v)).collect(),
            evaluations: evals,
        },
    })
}

/// Coding strong converse exponent: target an identity bit channel at `rate`
/// bits per use.
pub fn reduction_coding(
    w: &Channel,
    rate_bits: f64,
    distance: DistanceKind,
    unit: LogUnit,
) -> Result<ExponentResult> {
    let q = ExponentQuery::new(w.clone(), Channel::identity(2), rate_bits, distance, unit)?;
    sce(&q)
}

/// Simulation strong converse exponent: synthesize `t` from identity bit
/// channels at `rate_bits` target copies per bit... the rate argument is the
/// number of target copies per channel use times one bit, matching the
/// coding normalization.
pub fn reduction_simulation(
    t: &Channel,
    rate_bits: f64,
    distance: DistanceKind,
    unit: LogUnit,
) -> Result<ExponentResult> {
    let q = ExponentQuery::new(Channel::identity(2), t.clone(), rate_bits, distance, unit)?;
    sce(&q)
}

/// The alpha set of the variational formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSet {
    /// A closed sub-interval of [0, 1]; the full theorem uses (0, 1), whose
    /// supremum equals the one over the closure since the bracket is affine
    /// in alpha.
    Interval(f64, f64),
    Singleton(f64),
}

impl AlphaSet {
    fn endpoints(&self) -> Vec<f64> {
        match *self {
            AlphaSet::Interval(lo, hi) => vec![lo, hi],
            AlphaSet::Singleton(v) => vec![v],
        }
    }
}

/// Outcome of the brute-force variational evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct VariationalResult {
    pub value: f64,
    pub coarse_value: f64,
    pub refinement_shift: f64,
    pub mesh_too_coarse: bool,
    pub unit: LogUnit,
}

/// Per-candidate statistics entering the variational bracket.
#[derive(Clone, Copy)]
struct ChannelStat {
    d: f64, // D(P V~ || P V) in nats
    i: f64, // I(P, V~) in nats
}

/// Brute-force evaluation of the variational strong converse formula
///
/// `inf_{P_X} sup_{P_S} inf_{W~} inf_{T~} sup_{a in A} [ a D(P_X W~ || P_X W)
///   + r (1-a) D(P_S T~ || P_S T) + a | r I(P_S, T~) - I(P_X, W~) |_+ ]`
///
/// over simplex meshes, with one local-refinement pass around the incumbents.
/// The bracket is affine in alpha, so the alpha supremum sits at the set's
/// endpoints; the inner channel infimum only sees each candidate through the
/// pair (divergence cost, mutual information) and is monotone in both, so
/// candidates are reduced to their Pareto fronts first.
pub fn variational_sce(
    w: &Channel,
    t: &Channel,
    rate: f64,
    alpha_set: AlphaSet,
    unit: LogUnit,
    cfg: &Config,
) -> Result<VariationalResult> {
    let denom = cfg.mesh_denominator;
    // work guard: candidate channels grow as mesh^(rows)
    let mesh_w = simplex_mesh_size(w.output_size(), denom) as u128;
    let mesh_t = simplex_mesh_size(t.output_size(), denom) as u128;
    let n_w = mesh_w.pow(w.input_size() as u32);
    let n_t = mesh_t.pow(t.input_size() as u32);
    let budget = 40_000_000u128;
    if n_w.saturating_add(n_t) > budget {
        return Err(Error::CapExceeded {
            what: "variational mesh candidates (lower mesh_denominator)",
            needed: n_w.saturating_add(n_t),
            cap: budget,
        });
    }

    // the unperturbed channels are always candidates; they pin the zero-cost
    // corner of the trade-off exactly even when their rows are off-mesh
    let mut w_mesh = channel_mesh(w.input_size(), w.output_size(), denom);
    w_mesh.push(w.clone());
    let mut t_mesh = channel_mesh(t.input_size(), t.output_size(), denom);
    t_mesh.push(t.clone());

    let coarse = run_variational_pass(
        w,
        t,
        rate,
        &alpha_set,
        &simplex_mesh(w.input_size(), denom),
        &simplex_mesh(t.input_size(), denom),
        &w_mesh,
        &t_mesh,
    );

    // one refinement pass: coarse meshes plus fine patches around incumbents
    let f = cfg.mesh_refine_factor;
    let px_cands = extend_dist(simplex_mesh(w.input_size(), denom), &coarse.arg_px, denom, f);
    let ps_cands = extend_dist(simplex_mesh(t.input_size(), denom), &coarse.arg_ps, denom, f);
    let w_cands = extend_channel(w_mesh, &coarse.arg_w, denom, f);
    let t_cands = extend_channel(t_mesh, &coarse.arg_t, denom, f);
    let refined = run_variational_pass(w, t, rate, &alpha_set, &px_cands, &ps_cands, &w_cands, &t_cands);

    let shift = (refined.value - coarse.value).abs();
    Ok(VariationalResult {
        value: unit.from_nats(refined.value.min(coarse.value)),
        coarse_value: unit.from_nats(coarse.value),
        refinement_shift: unit.from_nats(shift),
        mesh_too_coarse: unit.from_nats(shift) > cfg.mesh_coarse_flag,
        unit,
    })
}

struct PassOutcome {
    value: f64, // nats
    arg_px: Distribution,
    arg_ps: Distribution,
    arg_w: Channel,
    arg_t: Channel,
}

#[allow(clippy::too_many_arguments)]
fn run_variational_pass(
    w: &Channel,
    t: &Channel,
    rate: f64,
    alpha_set: &AlphaSet,
    px_cands: &[Distribution],
    ps_cands: &[Distribution],
    w_cands: &[Channel],
    t_cands: &[Channel],
) -> PassOutcome {
    use rayon::prelude::*;
    let alphas = alpha_set.endpoints();

    // T-side stats depend on P_S only
    let t_fronts: Vec<Vec<(ChannelStat, usize)>> = ps_cands
        .par_iter()
        .map(|ps| {
            let stats: Vec<ChannelStat> = t_cands
                .iter()
                .map(|tc| ChannelStat {
                    d: weighted_row_kl(ps, tc, t),
                    i: crate::mutual_info::mi_nats(ps, tc),
                })
                .collect();
            pareto_t(&stats)
        })
        .collect();

    let per_px: Vec<(f64, usize, (usize, usize, usize))> = px_cands
        .par_iter()
        .map(|px| {
            let w_stats: Vec<ChannelStat> = w_cands
                .iter()
                .map(|wc| ChannelStat {
                    d: weighted_row_kl(px, wc, w),
                    i: crate::mutual_info::mi_nats(px, wc),
                })
                .collect();
            let w_front = pareto_w(&w_stats);
            // sup over P_S of the inner infimum
            let mut sup = f64::NEG_INFINITY;
            let mut arg = (0usize, 0usize, 0usize);
            for (s_idx, t_front) in t_fronts.iter().enumerate() {
                let mut inner = f64::INFINITY;
                let mut inner_arg = (0usize, 0usize);
                for &(ws, wi) in &w_front {
                    for &(ts, ti) in t_front {
                        let mut bracket = f64::NEG_INFINITY;
                        for &a in &alphas {
                            let v = a * ws.d
                                + rate * (1.0 - a) * ts.d
                                + a * (rate * ts.i - ws.i).max(0.0);
                            bracket = bracket.max(v);
                        }
                        if bracket < inner {
                            inner = bracket;
                            inner_arg = (wi, ti);
                        }
                    }
                }
                if inner > sup {
                    sup = inner;
                    arg = (s_idx, inner_arg.0, inner_arg.1);
                }
            }
            (sup, 0usize, arg)
        })
        .collect();

    let (best_idx, &(value, _, (s_idx, w_idx, t_idx))) = per_px
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap())
        .expect("non-empty mesh");
    PassOutcome {
        value,
        arg_px: px_cands[best_idx].clone(),
        arg_ps: ps_cands[s_idx].clone(),
        arg_w: w_cands[w_idx].clone(),
        arg_t: t_cands[t_idx].clone(),
    }
}

/// `D(P V~ || P V) = sum_x P(x) D(V~_x || V_x)` in nats.
fn weighted_row_kl(p: &Distribution, v_tilde: &Channel, v: &Channel) -> f64 {
    let mut sum = 0.0;
    for (x, &px) in p.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        let (rt, rv) = (v_tilde.row(x), v.row(x));
        for (&a, &b) in rt.iter().zip(rv) {
            if a == 0.0 {
                continue;
            }
            if b == 0.0 {
                return f64::INFINITY;
            }
            sum += px * a * (a / b).ln();
        }
    }
    sum
}

/// Pareto front for the W side: the bracket decreases in i and increases in
/// d, so keep minimal-d points of strictly increasing i.
fn pareto_w(stats: &[ChannelStat]) -> Vec<(ChannelStat, usize)> {
    let mut idx: Vec<usize> = (0..stats.len()).filter(|&k| stats[k].d.is_finite()).collect();
    idx.sort_by(|&a, &b| {
        stats[a]
            .d
            .partial_cmp(&stats[b].d)
            .unwrap()
            .then(stats[b].i.partial_cmp(&stats[a].i).unwrap())
    });
    let mut front = Vec::new();
    let mut best_i = f64::NEG_INFINITY;
    for k in idx {
        if stats[k].i > best_i {
            best_i = stats[k].i;
            front.push((stats[k], k));
        }
    }
    front
}

/// Pareto front for the T side: the bracket increases in both d and i, so
/// keep minimal-d points of strictly decreasing i.
fn pareto_t(stats: &[ChannelStat]) -> Vec<(ChannelStat, usize)> {
    let mut idx: Vec<usize> = (0..stats.len()).filter(|&k| stats[k].d.is_finite()).collect();
    idx.sort_by(|&a, &b| {
        stats[a]
            .d
            .partial_cmp(&stats[b].d)
            .unwrap()
            .then(stats[a].i.partial_cmp(&stats[b].i).unwrap())
    });
    let mut front = Vec::new();
    let mut best_i = f64::INFINITY;
    for k in idx {
        if stats[k].i < best_i {
            best_i = stats[k].i;
            front.push((stats[k], k));
        }
    }
    front
}

fn simplex_mesh_size(d: usize, m: usize) -> usize {
    // compositions of m into d parts
    let mut size = 1u128;
    for i in 0..(d - 1) {
        size = size * (m + 1 + i) as u128 / (i + 1) as u128;
    }
    size as usize
}

/// All distributions with coordinates on the 1/m grid.
fn simplex_mesh(d: usize, m: usize) -> Vec<Distribution> {
    let mut out = Vec::with_capacity(simplex_mesh_size(d, m));
    let mut counts = vec![0usize; d];
    mesh_fill(&mut out, &mut counts, 0, m, m);
    out
}

fn mesh_fill(out: &mut Vec<Distribution>, counts: &mut Vec<usize>, pos: usize, left: usize, m: usize) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        out.push(
            Distribution::normalized(counts.iter().map(|&c| c as f64).collect())
                .expect("mesh point"),
        );
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        mesh_fill(out, counts, pos + 1, left - c, m);
    }
}

/// All channels whose rows are mesh distributions.
fn channel_mesh(nin: usize, nout: usize, m: usize) -> Vec<Channel> {
    let rows = simplex_mesh(nout, m);
    let mut out = Vec::new();
    let mut pick = vec![0usize; nin];
    loop {
        let mat: Vec<f64> = pick
            .iter()
            .flat_map(|&k| rows[k].probs().to_vec())
            .collect();
        out.push(Channel::new(nin, nout, mat).expect("mesh rows are stochastic"));
        let mut c = 0;
        loop {
            pick[c] += 1;
            if pick[c] < rows.len() {
                break;
            }
            pick[c] = 0;
            c += 1;
            if c == nin {
                return out;
            }
        }
    }
}

/// Fine simplex patch: grid points at spacing 1/(m*f) within one coarse cell
/// of `center`.
fn simplex_patch(center: &Distribution, m: usize, f: usize) -> Vec<Distribution> {
    let d = center.len();
    let fine = m * f;
    let lo_hi: Vec<(usize, usize)> = center
        .probs()
        .iter()
        .map(|&p| {
            let c = (p * fine as f64).round() as i64;
            (
                (c - f as i64).max(0) as usize,
                ((c + f as i64) as usize).min(fine),
            )
        })
        .collect();
    let mut out = Vec::new();
    let mut counts = vec![0usize; d];
    patch_fill(&mut out, &mut counts, 0, fine, &lo_hi);
    out
}

fn patch_fill(
    out: &mut Vec<Distribution>,
    counts: &mut Vec<usize>,
    pos: usize,
    left: usize,
    lo_hi: &[(usize, usize)],
) {
    if pos + 1 == lo_hi.len() {
        if left >= lo_hi[pos].0 && left <= lo_hi[pos].1 {
            counts[pos] = left;
            out.push(
                Distribution::normalized(counts.iter().map(|&c| c as f64).collect())
                    .expect("patch point"),
            );
        }
        return;
    }
    let (lo, hi) = lo_hi[pos];
    for c in lo..=hi.min(left) {
        counts[pos] = c;
        patch_fill(out, counts, pos + 1, left - c, lo_hi);
    }
}

fn extend_dist(mut coarse: Vec<Distribution>, center: &Distribution, m: usize, f: usize) -> Vec<Distribution> {
    coarse.extend(simplex_patch(center, m, f));
    coarse
}

fn extend_channel(mut coarse: Vec<Channel>, center: &Channel, m: usize, f: usize) -> Vec<Channel> {
    let nin = center.input_size();
    let nout = center.output_size();
    let row_patches: Vec<Vec<Distribution>> = (0..nin)
        .map(|x| simplex_patch(&center.row_dist(x), m, f))
        .collect();
    let mut pick = vec![0usize; nin];
    loop {
        let mat: Vec<f64> = pick
            .iter()
            .enumerate()
            .flat_map(|(x, &k)| row_patches[x][k].probs().to_vec())
            .collect();
        coarse.push(Channel::new(nin, nout, mat).expect("patch rows are stochastic"));
        let mut c = 0;
        loop {
            pick[c] += 1;
            if pick[c] < row_patches[c].len() {
                break;
            }
            pick[c] = 0;
            c += 1;
            if c == nin {
                return coarse;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unit::LogUnit::Bits;

    fn q(w: Channel, t: Channel, r: f64, d: DistanceKind) -> ExponentQuery {
        ExponentQuery::new(w, t, r, d, Bits).unwrap()
    }

    #[test]
    fn inner_objective_identity_point() {
        // ((1-p+ap)/p) * (2-1) * 1 bit at alpha=0.9, p=1.05
        let query = q(Channel::identity(2), Channel::identity(2), 2.0, DistanceKind::Tv);
        let v = inner_objective(0.9, 1.05, &query).unwrap();
        let oracle = 1.0 / 1.05 - 1.0 + 0.9;
        assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");
    }

    #[test]
    fn inner_objective_zero_at_matched_identity() {
        let query = q(Channel::identity(2), Channel::identity(2), 1.0, DistanceKind::Tv);
        for (a, p) in [(0.3, 1.2), (0.7, 1.9)] {
            assert!(inner_objective(a, p, &query).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn inner_objective_pur_vanishes_at_p_two() {
        let query = q(Channel::identity(2), Channel::identity(2), 2.0, DistanceKind::Pur);
        let v = inner_objective(0.5, 1.999_999, &query).unwrap();
        assert!(v.abs() < 1e-5);
    }

    #[test]
    fn inner_objective_rejects_out_of_domain() {
        let query = q(Channel::identity(2), Channel::identity(2), 2.0, DistanceKind::Tv);
        assert!(inner_objective(0.5, 2.5, &query).is_err()); // p >= 1/(1-a) = 2
        assert!(inner_objective(1.0, 1.5, &query).is_err());
        let qp = q(Channel::identity(2), Channel::identity(2), 2.0, DistanceKind::Pur);
        assert!(inner_objective(0.5, 2.0, &qp).is_err());
    }

    #[test]
    fn sce_identity_pair_tv_rate_two_is_one_bit() {
        let res = sce(&q(Channel::identity(2), Channel::identity(2), 2.0, DistanceKind::Tv)).unwrap();
        assert!((res.value_raw - 1.0).abs() < 1e-9, "{}", res.value_raw);
    }

    #[test]
    fn sce_identity_pair_below_rate_clamps() {
        let res = sce(&q(Channel::identity(2), Channel::identity(2), 0.5, DistanceKind::Tv)).unwrap();
        assert!(res.value_raw <= 1e-12);
        assert_eq!(res.clamped, 0.0);
    }

    #[test]
    fn sce_matched_rate_is_zero() {
        // r = C(W)/C(T) exactly -> 0 within grid tolerance
        let w = Channel::bsc(0.1).unwrap();
        let t = Channel::bsc(0.25).unwrap();
        let cfg = Config::default();
        let cw = crate::capacity::capacity(&w, Bits, &cfg).value;
        let ct = crate::capacity::capacity(&t, Bits, &cfg).value;
        for d in [DistanceKind::Tv, DistanceKind::Pur, DistanceKind::Renyi(0.4)] {
            let res = sce(&q(w.clone(), t.clone(), cw / ct, d)).unwrap();
            assert!(res.value_raw.abs() <= 1e-3, "{:?}: {}", res.distance, res.value_raw);
        }
    }

    #[test]
    fn sce_monotone_in_rate() {
        let w = Channel::bsc(0.1).unwrap();
        let t = Channel::bsc(0.3).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for r in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let res = sce(&q(w.clone(), t.clone(), r, DistanceKind::Tv)).unwrap();
            assert!(res.value_raw >= prev - 1e-10, "rate {r}");
            prev = res.value_raw;
        }
    }

    #[test]
    fn pur_equals_twice_the_half_alpha_tv_slice() {
        let w = Channel::bsc(0.05).unwrap();
        let t = Channel::bsc(0.2).unwrap();
        for r in [1.5, 3.0] {
            let pur = sce(&q(w.clone(), t.clone(), r, DistanceKind::Pur)).unwrap();
            let mut tv_half = q(w.clone(), t.clone(), r, DistanceKind::Tv);
            tv_half.alpha_fixed = Some(0.5);
            let tv_half = sce(&tv_half).unwrap();
            assert!(
                (pur.value_raw - 2.0 * tv_half.value_raw).abs() < 1e-6,
                "r={r}: pur {} vs 2x tv@1/2 {}",
                pur.value_raw,
                2.0 * tv_half.value_raw
            );
        }
    }

    #[test]
    fn reduction_simulation_identity_target() {
        let res = reduction_simulation(&Channel::identity(2), 2.0, DistanceKind::Tv, Bits).unwrap();
        assert!((res.value_raw - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reduction_coding_at_capacity_is_zero() {
        let w = Channel::identity(2);
        for d in [DistanceKind::Tv, DistanceKind::Pur] {
            let res = reduction_coding(&w, 1.0, d, Bits).unwrap();
            assert!(res.value_raw.abs() < 1e-9);
        }
    }

    #[test]
    fn variational_identity_half_alpha() {
        // A = {1/2}, identities, r = 2 -> (1/2)(r-1) = 0.5 bits
        let cfg = Config::default();
        let res = variational_sce(
            &Channel::identity(2),
            &Channel::identity(2),
            2.0,
            AlphaSet::Singleton(0.5),
            Bits,
            &cfg,
        )
        .unwrap();
        assert!((res.value - 0.5).abs() < 1e-6, "{}", res.value);
        // equals half the purified exponent
        let pur = sce(&q(Channel::identity(2), Channel::identity(2), 2.0, DistanceKind::Pur)).unwrap();
        assert!((pur.value_raw - 2.0 * res.value).abs() < 1e-6);
    }

    #[test]
    fn variational_rate_zero_is_zero() {
        let cfg = Config::default();
        let w = Channel::bsc(0.15).unwrap();
        let res = variational_sce(
            &w,
            &Channel::bsc(0.3).unwrap(),
            0.0,
            AlphaSet::Interval(0.0, 1.0),
            Bits,
            &cfg,
        )
        .unwrap();
        assert!(res.value.abs() < 1e-12, "{}", res.value);
        // closed form agrees: raw supremum tends to zero from below
        let sres = sce(&q(w, Channel::bsc(0.3).unwrap(), 0.0, DistanceKind::Tv)).unwrap();
        assert!(sres.value_raw.abs() < 2e-2);
    }

    #[test]
    fn variational_matches_closed_form_identity() {
        let cfg = Config::default();
        let res = variational_sce(
            &Channel::identity(2),
            &Channel::identity(2),
            2.0,
            AlphaSet::Interval(0.0, 1.0),
            Bits,
            &cfg,
        )
        .unwrap();
        assert!((res.value - 1.0).abs() < 1e-6, "{}", res.value);
    }
}
