use crate::channel::Channel;
use crate::dist::Distribution;
use crate::divergence::{check_renyi_order, renyi_nats};
use crate::error::Result;
use crate::unit::LogUnit;

/// Joint input-output distribution `p(x) w(y|x)` flattened row-major over
/// (x, y).
pub fn joint_dist(p: &Distribution, w: &Channel) -> Result<Distribution> {
    w.check_compatible_input(p)?;
    let mut v = Vec::with_capacity(p.len() * w.output_size());
    for (x, &px) in p.probs().iter().enumerate() {
        for y in 0..w.output_size() {
            v.push(px * w.entry(x, y));
        }
    }
    Distribution::normalized(v)
}

/// Product distribution `p(x) q(y)` flattened row-major over (x, y).
pub fn product_dist(p: &Distribution, q: &Distribution) -> Distribution {
    let mut v = Vec::with_capacity(p.len() * q.len());
    for &px in p.probs() {
        for &qy in q.probs() {
            v.push(px * qy);
        }
    }
    Distribution::normalized(v).expect("product of distributions")
}

/// Channel mutual information `I(p, W) = D(pW || p x pW)`.
pub fn mi(p: &Distribution, w: &Channel, unit: LogUnit) -> Result<f64> {
    w.check_compatible_input(p)?;
    Ok(unit.from_nats(mi_nats(p, w)))
}

pub(crate) fn mi_nats(p: &Distribution, w: &Channel) -> f64 {
    let pw = w.push_forward(p).expect("dims checked");
    let mut sum = 0.0;
    for (x, &px) in p.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, &py) in pw.probs().iter().enumerate() {
            let wyx = w.entry(x, y);
            if wyx > 0.0 {
                sum += px * wyx * (wyx / py).ln();
            }
        }
    }
    sum.max(0.0)
}

/// Sibson alpha-mutual information, closed form
/// `(a/(a-1)) log sum_y (sum_x p(x) w(y|x)^a)^(1/a)`.
pub fn sibson(p: &Distribution, w: &Channel, alpha: f64, unit: LogUnit) -> Result<f64> {
    w.check_compatible_input(p)?;
    check_renyi_order(alpha)?;
    Ok(unit.from_nats(sibson_nats(p, w, alpha)))
}

pub(crate) fn sibson_nats(p: &Distribution, w: &Channel, alpha: f64) -> f64 {
    // (a/(a-1)) log sum_y (sum_x p w^a)^(1/a), inner and outer sums in log
    // domain so extreme orders stay finite
    let mut outer_terms = Vec::with_capacity(w.output_size());
    let mut inner_terms = Vec::with_capacity(p.len());
    for y in 0..w.output_size() {
        inner_terms.clear();
        for (x, &px) in p.probs().iter().enumerate() {
            let wyx = w.entry(x, y);
            if px > 0.0 && wyx > 0.0 {
                inner_terms.push(px.ln() + alpha * wyx.ln());
            }
        }
        if !inner_terms.is_empty() {
            outer_terms.push(crate::divergence::lse(&inner_terms) / alpha);
        }
    }
    alpha / (alpha - 1.0) * crate::divergence::lse(&outer_terms)
}

/// The output distribution achieving the Sibson infimum:
/// `Q*(y) prop (sum_x p(x) w(y|x)^a)^(1/a)`.
pub fn sibson_minimizer(p: &Distribution, w: &Channel, alpha: f64) -> Result<Distribution> {
    w.check_compatible_input(p)?;
    check_renyi_order(alpha)?;
    let mut weights = Vec::with_capacity(w.output_size());
    for y in 0..w.output_size() {
        let inner: f64 = p
            .probs()
            .iter()
            .enumerate()
            .filter(|(_, &px)| px > 0.0)
            .map(|(x, &px)| px * w.entry(x, y).powf(alpha))
            .sum();
        weights.push(if inner > 0.0 { inner.powf(1.0 / alpha) } else { 0.0 });
    }
    Distribution::normalized(weights)
}

/// Result of the Augustin fixed-point iteration.
#[derive(Debug, Clone)]
pub struct AugustinResult {
    pub value: f64,
    pub minimizer: Distribution,
    pub converged: bool,
    pub iters: usize,
}

/// Augustin-Csiszar alpha-mutual information
/// `inf_Q E_{x~p} D_alpha(W_x || Q)`, computed by the Augustin mean
/// iteration `Q <- normalized E_x-tilted mean` with geometric damping
/// `1/alpha` for alpha > 1.
pub fn augustin(
    p: &Distribution,
    w: &Channel,
    alpha: f64,
    unit: LogUnit,
    tol: f64,
    max_iters: usize,
) -> Result<AugustinResult> {
    w.check_compatible_input(p)?;
    check_renyi_order(alpha)?;
    let ny = w.output_size();
    let mut q = vec![1.0 / ny as f64; ny];
    let theta = if alpha > 1.0 { 1.0 / alpha } else { 1.0 };
    let objective = |q: &[f64]| -> f64 {
        p.probs()
            .iter()
            .enumerate()
            .filter(|(_, &px)| px > 0.0)
            .map(|(x, &px)| px * renyi_nats(w.row(x), q, alpha))
            .sum()
    };
    let mut value = objective(&q);
    let mut converged = false;
    let mut iters = 0;
    while iters < max_iters {
        iters += 1;
        // tilted conditional means
        let mut mean = vec![0.0; ny];
        for (x, &px) in p.probs().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let mut tilted: Vec<f64> = (0..ny)
                .map(|y| {
                    let wyx = w.entry(x, y);
                    if wyx > 0.0 && q[y] > 0.0 {
                        wyx.powf(alpha) * q[y].powf(1.0 - alpha)
                    } else {
                        0.0
                    }
                })
                .collect();
            let z: f64 = tilted.iter().sum();
            if z > 0.0 {
                for t in &mut tilted {
                    *t /= z;
                }
            }
            for (m, t) in mean.iter_mut().zip(&tilted) {
                *m += px * t;
            }
        }
        let mut next: Vec<f64> = if theta == 1.0 {
            mean
        } else {
            q.iter()
                .zip(&mean)
                .map(|(&old, &new)| {
                    if new > 0.0 && old > 0.0 {
                        new.powf(theta) * old.powf(1.0 - theta)
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let z: f64 = next.iter().sum();
        for v in &mut next {
            *v /= z;
        }
        let next_value = objective(&next);
        let change = (next_value - value).abs();
        q = next;
        value = next_value;
        if change <= tol * value.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(AugustinResult {
        value: unit.from_nats(value),
        minimizer: Distribution::normalized(q)?,
        converged,
        iters,
    })
}

/// Mutual information variance
/// `sum_xy p(x) w(y|x) (log(w(y|x)/pw(y)) - I(p,w))^2`;
/// cells with `w(y|x) = 0` contribute nothing.
pub fn mi_variance(p: &Distribution, w: &Channel, unit: LogUnit) -> Result<f64> {
    w.check_compatible_input(p)?;
    Ok(unit.from_nats_sq(mi_variance_nats(p, w)))
}

pub(crate) fn mi_variance_nats(p: &Distribution, w: &Channel) -> f64 {
    let pw = w.push_forward(p).expect("dims checked");
    let i = mi_nats(p, w);
    let mut var = 0.0;
    for (x, &px) in p.probs().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        for (y, &py) in pw.probs().iter().enumerate() {
            let wyx = w.entry(x, y);
            if wyx > 0.0 {
                let dev = (wyx / py).ln() - i;
                var += px * wyx * dev * dev;
            }
        }
    }
    var.max(0.0)
}
