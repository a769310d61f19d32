use crate::dist::Distribution;
use crate::error::{Error, Result};

/// A discrete memoryless channel: a row-stochastic matrix, rows indexed by
/// input symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    matrix: Vec<f64>, // row-major, len = input_size * output_size
    input_size: usize,
    output_size: usize,
}

impl Channel {
    pub fn new(input_size: usize, output_size: usize, matrix: Vec<f64>) -> Result<Self> {
        if input_size == 0 || output_size == 0 || matrix.len() != input_size * output_size {
            return Err(Error::DimensionMismatch {
                expected: input_size * output_size,
                got: matrix.len(),
            });
        }
        for row in 0..input_size {
            let mut sum = 0.0;
            for col in 0..output_size {
                let v = matrix[row * output_size + col];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidChannel {
                        row,
                        value: v,
                        reason: "entry is negative or not finite",
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidChannel {
                    row,
                    value: sum,
                    reason: "row does not sum to 1",
                });
            }
        }
        Ok(Channel {
            matrix,
            input_size,
            output_size,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        let output_size = rows.first().map(|r| r.len()).unwrap_or(0);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != output_size {
                return Err(Error::InvalidChannel {
                    row: i,
                    value: r.len() as f64,
                    reason: "ragged row length",
                });
            }
        }
        Channel::new(input_size, output_size, rows.into_iter().flatten().collect())
    }

    pub fn identity(k: usize) -> Self {
        let mut matrix = vec![0.0; k * k];
        for i in 0..k {
            matrix[i * k + i] = 1.0;
        }
        Channel {
            matrix,
            input_size: k,
            output_size: k,
        }
    }

    /// Binary symmetric channel with crossover probability `delta`.
    pub fn bsc(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::DomainViolation {
                name: "delta",
                value: delta,
                domain: "[0, 1]",
            });
        }
        Channel::from_rows(vec![vec![1.0 - delta, delta], vec![delta, 1.0 - delta]])
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.matrix[x * self.output_size + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.matrix[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn row_dist(&self, x: usize) -> Distribution {
        Distribution::normalized(self.row(x).to_vec()).expect("channel row is a distribution")
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.matrix.chunks(self.output_size)
    }

    /// Output distribution induced by pushing `p` through the channel.
    pub fn push_forward(&self, p: &Distribution) -> Result<Distribution> {
        if p.len() != self.input_size {
            return Err(Error::DimensionMismatch {
                expected: self.input_size,
                got: p.len(),
            });
        }
        let mut out = vec![0.0; self.output_size];
        for (x, &px) in p.probs().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (y, o) in out.iter_mut().enumerate() {
                *o += px * self.entry(x, y);
            }
        }
        Distribution::normalized(out)
    }

    /// n-fold Kronecker power, lexicographic index order with the first
    /// symbol most significant.
    pub fn product(&self, n: usize, entry_cap: usize) -> Result<Channel> {
        if n == 0 {
            return Err(Error::DomainViolation {
                name: "n",
                value: 0.0,
                domain: "n >= 1",
            });
        }
        let in_size = (self.input_size as u128)
            .checked_pow(n as u32)
            .ok_or(Error::Overflow {
                what: "product channel input size",
            })?;
        let out_size = (self.output_size as u128)
            .checked_pow(n as u32)
            .ok_or(Error::Overflow {
                what: "product channel output size",
            })?;
        let total = in_size.checked_mul(out_size).ok_or(Error::Overflow {
            what: "product channel entries",
        })?;
        if total > entry_cap as u128 {
            return Err(Error::CapExceeded {
                what: "product channel entries",
                needed: total,
                cap: entry_cap as u128,
            });
        }
        let (ni, no) = (in_size as usize, out_size as usize);
        let mut matrix = vec![0.0; ni * no];
        for xi in 0..ni {
            let xs = unrank(xi, self.input_size, n);
            for yi in 0..no {
                let ys = unrank(yi, self.output_size, n);
                let mut v = 1.0;
                for t in 0..n {
                    v *= self.entry(xs[t], ys[t]);
                    if v == 0.0 {
                        break;
                    }
                }
                matrix[xi * no + yi] = v;
            }
        }
        Channel::new(ni, no, matrix)
    }

    pub fn check_compatible_input(&self, p: &Distribution) -> Result<()> {
        if p.len() != self.input_size {
            return Err(Error::DimensionMismatch {
                expected: self.input_size,
                got: p.len(),
            });
        }
        Ok(())
    }
}

/// Decode a lexicographic index into symbols, first symbol most significant.
pub fn unrank(mut index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0usize; n];
    for t in (0..n).rev() {
        out[t] = index % base;
        index /= base;
    }
    out
}

/// Inverse of [`unrank`].
pub fn rank(symbols: &[usize], base: usize) -> usize {
    symbols.iter().fold(0, |acc, &s| acc * base + s)
}

/// Worst-case total-variation distance between two channels with the same
/// dimensions: `max_s TV(a_s, b_s)`.
pub fn channel_tv(a: &Channel, b: &Channel) -> Result<f64> {
    check_same_dims(a, b)?;
    let mut worst = 0.0_f64;
    for (ra, rb) in a.rows().zip(b.rows()) {
        let tv = 0.5 * ra.iter().zip(rb).map(|(x, y)| (x - y).abs()).sum::<f64>();
        worst = worst.max(tv);
    }
    Ok(worst)
}

/// Worst-case purified distance between two channels: `max_s sqrt(1 - F)`.
pub fn channel_purified(a: &Channel, b: &Channel) -> Result<f64> {
    check_same_dims(a, b)?;
    let mut worst = 0.0_f64;
    for (ra, rb) in a.rows().zip(b.rows()) {
        let bc: f64 = ra.iter().zip(rb).map(|(x, y)| (x * y).sqrt()).sum();
        worst = worst.max((1.0 - (bc * bc).min(1.0)).max(0.0).sqrt());
    }
    Ok(worst)
}

/// Renyi-based channel measure of order `alpha` in (0, 1):
/// `1 - inf_s exp(-D_alpha(a_s || b_s))`.
pub fn channel_renyi_measure(a: &Channel, b: &Channel, alpha: f64) -> Result<f64> {
    check_same_dims(a, b)?;
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::DomainViolation {
            name: "alpha",
            value: alpha,
            domain: "(0, 1)",
        });
    }
    let mut inf = f64::INFINITY;
    for (ra, rb) in a.rows().zip(rb_rows(b)) {
        // exp(-D_alpha) = (sum p^a q^(1-a))^(1/(1-a)) for alpha in (0,1)
        let s: f64 = ra
            .iter()
            .zip(rb)
            .filter(|(&p, &q)| p > 0.0 && q > 0.0)
            .map(|(&p, &q)| p.powf(alpha) * q.powf(1.0 - alpha))
            .sum();
        inf = inf.min(s.powf(1.0 / (1.0 - alpha)));
    }
    Ok(1.0 - inf)
}

fn rb_rows(b: &Channel) -> impl Iterator<Item = &[f64]> {
    b.rows()
}

fn check_same_dims(a: &Channel, b: &Channel) -> Result<()> {
    if a.input_size() != b.input_size() {
        return Err(Error::DimensionMismatch {
            expected: a.input_size(),
            got: b.input_size(),
        });
    }
    if a.output_size() != b.output_size() {
        return Err(Error::DimensionMismatch {
            expected: a.output_size(),
            got: b.output_size(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_identity_is_identity() {
        let id2 = Channel::identity(2);
        let id4 = id2.product(2, 1 << 20).unwrap();
        assert_eq!(id4, Channel::identity(4));
    }

    #[test]
    fn product_entry_matches_hand_value() {
        let w = Channel::bsc(0.1).unwrap();
        let w2 = w.product(2, 1 << 20).unwrap();
        // input (0,0) -> output (0,1): 0.9 * 0.1
        assert!((w2.entry(0, 1) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn product_n1_is_self() {
        let w = Channel::bsc(0.3).unwrap();
        assert_eq!(w.product(1, 1 << 20).unwrap(), w);
    }

    #[test]
    fn rank_unrank_round_trip() {
        for i in 0..27 {
            assert_eq!(rank(&unrank(i, 3, 3), 3), i);
        }
    }

    #[test]
    fn channel_tv_of_identical_is_zero() {
        let w = Channel::bsc(0.2).unwrap();
        assert_eq!(channel_tv(&w, &w).unwrap(), 0.0);
    }

    #[test]
    fn rejects_non_stochastic_row() {
        let err = Channel::from_rows(vec![vec![0.6, 0.6], vec![0.5, 0.5]]);
        match err {
            Err(Error::InvalidChannel { row, .. }) => assert_eq!(row, 0),
            other => panic!("expected InvalidChannel, got {other:?}"),
        }
    }
}
