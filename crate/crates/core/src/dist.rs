use crate::error::{Error, Result};

/// A probability distribution over a finite alphabet.
///
/// Entries are non-negative and sum to 1 within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution {
                index: 0,
                value: 0.0,
                reason: "empty alphabet",
            });
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution {
                    index: i,
                    value: p,
                    reason: "entry is negative or not finite",
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution {
                index: 0,
                value: sum,
                reason: "entries do not sum to 1",
            });
        }
        Ok(Distribution { probs })
    }

    /// Rescales a non-negative vector to sum exactly to 1. Used for internally
    /// computed vectors where float drift would trip the strict constructor.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::InvalidDistribution {
                index: 0,
                value: sum,
                reason: "weights do not sum to a positive finite value",
            });
        }
        for w in &mut weights {
            if !(*w >= 0.0) {
                return Err(Error::InvalidDistribution {
                    index: 0,
                    value: *w,
                    reason: "entry is negative or not finite",
                });
            }
            *w /= sum;
        }
        Ok(Distribution { probs: weights })
    }

    pub fn uniform(k: usize) -> Self {
        Distribution {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn point_mass(k: usize, at: usize) -> Self {
        let mut probs = vec![0.0; k];
        probs[at] = 1.0;
        Distribution { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// i.i.d. product distribution on `n` copies of the alphabet,
    /// lexicographic index order with the first symbol most significant.
    pub fn product(&self, n: usize, entry_cap: usize) -> Result<Distribution> {
        let k = self.len();
        let size = (k as u128).checked_pow(n as u32).ok_or(Error::Overflow {
            what: "product distribution size",
        })?;
        if size > entry_cap as u128 {
            return Err(Error::CapExceeded {
                what: "product distribution entries",
                needed: size,
                cap: entry_cap as u128,
            });
        }
        let mut out = vec![1.0];
        for _ in 0..n {
            let mut next = Vec::with_capacity(out.len() * k);
            for &v in &out {
                for &p in &self.probs {
                    next.push(v * p);
                }
            }
            out = next;
        }
        Ok(Distribution { probs: out })
    }

    pub fn check_same_len(&self, other: &Distribution) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }
}
