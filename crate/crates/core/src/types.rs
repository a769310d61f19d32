use crate::dist::Distribution;
use crate::error::{Error, Result};

/// The type (empirical composition) of a length-`n` string over a finite
/// alphabet: symbol counts summing to `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeClass {
    counts: Vec<usize>,
    n: usize,
}

impl TypeClass {
    pub fn new(counts: Vec<usize>, n: usize) -> Result<Self> {
        let total: usize = counts.iter().sum();
        if total != n || counts.is_empty() {
            return Err(Error::DomainViolation {
                name: "counts",
                value: total as f64,
                domain: "sum equal to n over a non-empty alphabet",
            });
        }
        Ok(TypeClass { counts, n })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// Empirical distribution counts / n.
    pub fn empirical(&self) -> Distribution {
        Distribution::normalized(self.counts.iter().map(|&c| c as f64).collect())
            .expect("counts sum to n >= 1")
    }

    /// Number of strings with this composition: the multinomial coefficient.
    pub fn class_size(&self) -> Result<u128> {
        // n! / prod c_i! computed as a product of binomials over partial sums.
        let mut size: u128 = 1;
        let mut seen = 0usize;
        for &c in &self.counts {
            seen += c;
            size = size
                .checked_mul(binomial(seen, c)?)
                .ok_or(Error::Overflow {
                    what: "multinomial coefficient",
                })?;
        }
        Ok(size)
    }

    /// ln of the class size, usable when the exact count overflows.
    pub fn ln_class_size(&self) -> f64 {
        let mut v = ln_factorial(self.n);
        for &c in &self.counts {
            v -= ln_factorial(c);
        }
        v
    }

    /// The lexicographically smallest string in this class:
    /// symbol 0 repeated counts[0] times, then symbol 1, and so on.
    pub fn representative(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.n);
        for (sym, &c) in self.counts.iter().enumerate() {
            s.extend(std::iter::repeat(sym).take(c));
        }
        s
    }

    /// All strings in the class, in lexicographic order, as long as the class
    /// is no larger than `cap`.
    pub fn strings(&self, cap: usize) -> Result<Vec<Vec<usize>>> {
        let size = self.class_size()?;
        if size > cap as u128 {
            return Err(Error::CapExceeded {
                what: "type class enumeration",
                needed: size,
                cap: cap as u128,
            });
        }
        let mut cur = self.representative();
        let mut out = Vec::with_capacity(size as usize);
        loop {
            out.push(cur.clone());
            if !next_permutation(&mut cur) {
                break;
            }
        }
        Ok(out)
    }

    /// The type on `n` symbols nearest to `p` (largest-remainder rounding,
    /// earlier symbols win ties).
    pub fn nearest(p: &Distribution, n: usize) -> TypeClass {
        let k = p.len();
        let mut counts: Vec<usize> = p.probs().iter().map(|&q| (q * n as f64) as usize).collect();
        let mut assigned: usize = counts.iter().sum();
        let mut rema: Vec<(usize, f64)> = p
            .probs()
            .iter()
            .enumerate()
            .map(|(i, &q)| (i, q * n as f64 - counts[i] as f64))
            .collect();
        rema.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let mut j = 0;
        while assigned < n {
            counts[rema[j % k].0] += 1;
            assigned += 1;
            j += 1;
        }
        TypeClass { counts, n }
    }
}

/// All types of length `n` over an alphabet of `k` symbols: the compositions
/// of `n` into `k` non-negative parts, lexicographic by counts.
pub fn enumerate_types(n: usize, k: usize) -> Result<Vec<TypeClass>> {
    if n == 0 || k == 0 {
        return Err(Error::DomainViolation {
            name: "n, k",
            value: 0.0,
            domain: "n >= 1 and k >= 1",
        });
    }
    let mut out = Vec::new();
    let mut counts = vec![0usize; k];
    fill(&mut out, &mut counts, 0, n, n);
    Ok(out)
}

fn fill(out: &mut Vec<TypeClass>, counts: &mut Vec<usize>, pos: usize, left: usize, n: usize) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        out.push(TypeClass {
            counts: counts.clone(),
            n,
        });
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        fill(out, counts, pos + 1, left - c, n);
    }
}

fn binomial(n: usize, k: usize) -> Result<u128> {
    let k = k.min(n - k.min(n));
    let mut num: u128 = 1;
    for i in 0..k {
        num = num
            .checked_mul((n - i) as u128)
            .ok_or(Error::Overflow {
                what: "binomial coefficient",
            })?
            / (i as u128 + 1);
    }
    Ok(num)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// In-place next lexicographic permutation; false when `s` was the last one.
fn next_permutation(s: &mut [usize]) -> bool {
    if s.len() < 2 {
        return false;
    }
    let mut i = s.len() - 1;
    while i > 0 && s[i - 1] >= s[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = s.len() - 1;
    while s[j] <= s[i - 1] {
        j -= 1;
    }
    s.swap(i - 1, j);
    s[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn types_n2_k2() {
        let types = enumerate_types(2, 2).unwrap();
        let counts: Vec<_> = types.iter().map(|t| t.counts().to_vec()).collect();
        assert_eq!(counts, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert!(types.len() <= 9); // (n+1)^k bound
    }

    #[test]
    fn types_n4_k3_stars_and_bars() {
        assert_eq!(enumerate_types(4, 3).unwrap().len(), 15);
    }

    #[test]
    fn class_size_basic() {
        let t = TypeClass::new(vec![1, 1], 2).unwrap();
        assert_eq!(t.class_size().unwrap(), 2);
        let t = TypeClass::new(vec![2, 2], 4).unwrap();
        assert_eq!(t.class_size().unwrap(), 6);
    }

    #[test]
    fn ln_class_size_matches_exact() {
        let t = TypeClass::new(vec![3, 4, 5], 12).unwrap();
        let exact = t.class_size().unwrap() as f64;
        assert!((t.ln_class_size() - exact.ln()).abs() < 1e-9);
    }

    #[test]
    fn strings_enumerates_whole_class() {
        let t = TypeClass::new(vec![2, 1], 3).unwrap();
        let ss = t.strings(100).unwrap();
        assert_eq!(ss.len(), 3);
        assert!(ss.contains(&vec![0, 0, 1]));
        assert!(ss.contains(&vec![0, 1, 0]));
        assert!(ss.contains(&vec![1, 0, 0]));
    }

    #[test]
    fn nearest_type_uniform_odd_length() {
        let p = Distribution::uniform(2);
        let t = TypeClass::nearest(&p, 3);
        assert_eq!(t.counts(), &[2, 1]); // earlier symbol wins the tie
    }

    #[test]
    fn count_bound_holds() {
        for (n, k) in [(2usize, 2usize), (4, 3), (5, 2)] {
            let types = enumerate_types(n, k).unwrap();
            assert!(types.len() as f64 <= ((n + 1) as f64).powi(k as i32));
        }
    }
}
