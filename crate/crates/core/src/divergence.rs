use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::unit::LogUnit;

/// Total variation distance, `(1/2) sum |p - q|`.
pub fn tv(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_len(q)?;
    Ok(0.5
        * p.probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Classical fidelity `(sum sqrt(p q))^2`.
pub fn fidelity(p: &Distribution, q: &Distribution) -> Result<f64> {
    p.check_same_len(q)?;
    let bc: f64 = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    Ok((bc * bc).min(1.0))
}

/// Purified distance `sqrt(1 - F)`.
pub fn purified(p: &Distribution, q: &Distribution) -> Result<f64> {
    Ok((1.0 - fidelity(p, q)?).max(0.0).sqrt())
}

/// Kullback-Leibler divergence with the 0 log 0 = 0 convention;
/// `+inf` when supp(p) is not contained in supp(q).
pub fn kl(p: &Distribution, q: &Distribution, unit: LogUnit) -> Result<f64> {
    p.check_same_len(q)?;
    let mut sum = 0.0;
    for (&a, &b) in p.probs().iter().zip(q.probs()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        sum += a * (a / b).ln();
    }
    Ok(unit.from_nats(sum))
}

/// Renyi divergence of order `alpha` in (0,1) or (1,inf).
pub fn renyi(p: &Distribution, q: &Distribution, alpha: f64, unit: LogUnit) -> Result<f64> {
    p.check_same_len(q)?;
    check_renyi_order(alpha)?;
    Ok(unit.from_nats(renyi_nats(p.probs(), q.probs(), alpha)))
}

/// Log-sum-exp, tolerant of empty input and -inf entries.
pub(crate) fn lse(vals: &[f64]) -> f64 {
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m; // empty or all -inf (or +inf dominates)
    }
    m + vals.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
}

/// Internal Renyi divergence on raw slices, in nats, evaluated in log domain
/// so extreme orders stay finite. `alpha` must be a valid order (checked by
/// the public wrapper).
pub(crate) fn renyi_nats(p: &[f64], q: &[f64], alpha: f64) -> f64 {
    let mut terms = Vec::with_capacity(p.len());
    for (&a, &b) in p.iter().zip(q) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            if alpha > 1.0 {
                return f64::INFINITY;
            }
            continue;
        }
        terms.push(alpha * a.ln() + (1.0 - alpha) * b.ln());
    }
    if terms.is_empty() {
        return f64::INFINITY; // disjoint supports
    }
    lse(&terms) / (alpha - 1.0)
}

pub(crate) fn check_renyi_order(alpha: f64) -> Result<()> {
    if alpha == 1.0 {
        return Err(Error::AlphaOne);
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::DomainViolation {
            name: "alpha",
            value: alpha,
            domain: "(0, 1) or (1, inf)",
        });
    }
    Ok(())
}

/// Max-divergence `inf { lam : p <= e^lam q } = max_x log(p/q)` over supp(p).
pub fn dmax(p: &Distribution, q: &Distribution, unit: LogUnit) -> Result<f64> {
    p.check_same_len(q)?;
    Ok(unit.from_nats(dmax_nats(p.probs(), q.probs())))
}

pub(crate) fn dmax_nats(p: &[f64], q: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (&a, &b) in p.iter().zip(q) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        worst = worst.max((a / b).ln());
    }
    worst
}

/// eps-smooth max-divergence: min over `p~` with `TV(p~, p) <= eps` of
/// `dmax(p~, q)`, computed by bisection on the threshold.
///
/// A threshold `lam >= 0` is feasible iff the mass exceeding the cap,
/// `sum_x (p(x) - e^lam q(x))_+`, is at most `eps`; the total cap mass
/// `sum_x e^lam q(x) = e^lam` is then at least 1, so the clipped vector can
/// be refilled into a distribution under the cap.
pub fn dmax_smooth(
    p: &Distribution,
    q: &Distribution,
    eps: f64,
    unit: LogUnit,
    tol: f64,
    max_iters: usize,
) -> Result<f64> {
    p.check_same_len(q)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::DomainViolation {
            name: "eps",
            value: eps,
            domain: "[0, 1)",
        });
    }
    let excess = |lam: f64| -> f64 {
        p.probs()
            .iter()
            .zip(q.probs())
            .map(|(&a, &b)| (a - lam.exp() * b).max(0.0))
            .sum()
    };
    // lam = 0 feasible iff TV(p, q) <= eps
    if excess(0.0) <= eps {
        return Ok(0.0);
    }
    // mass on supp(q)^c can never be capped; if it exceeds eps no threshold works
    let outside: f64 = p
        .probs()
        .iter()
        .zip(q.probs())
        .filter(|(_, &b)| b == 0.0)
        .map(|(&a, _)| a)
        .sum();
    if outside > eps {
        return Ok(f64::INFINITY);
    }
    let mut lo = 0.0;
    let mut hi = p
        .probs()
        .iter()
        .zip(q.probs())
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| (a / b).ln())
        .fold(0.0_f64, f64::max);
    debug_assert!(excess(hi) <= eps);
    let mut iters = 0;
    while hi - lo > tol && iters < max_iters {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    Ok(unit.from_nats(hi))
}
