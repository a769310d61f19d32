use crate::channel::Channel;
use crate::dist::Distribution;
use crate::error::{Error, Result};
use serde::Serialize;

/// A bipartite conditional distribution N(x, z | s, y) subject to the two
/// non-signaling marginal constraints: the z-marginal ignores s and the
/// x-marginal ignores y.
#[derive(Debug, Clone, Serialize)]
pub struct NsStrategy {
    table: Vec<f64>, // index ((s * ny + y) * nx + x) * nz + z
    ns: usize,
    ny: usize,
    nx: usize,
    nz: usize,
}

/// Worst violations of the defining equalities, one per family.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NsResiduals {
    pub normalization: f64,
    pub z_marginal_vs_s: f64,
    pub x_marginal_vs_y: f64,
    pub negativity: f64,
}

impl NsResiduals {
    pub fn max(&self) -> f64 {
        self.normalization
            .max(self.z_marginal_vs_s)
            .max(self.x_marginal_vs_y)
            .max(self.negativity)
            .max(0.0)
    }
}

impl NsStrategy {
    pub fn from_table(table: Vec<f64>, ns: usize, ny: usize, nx: usize, nz: usize) -> Result<Self> {
        if table.len() != ns * ny * nx * nz {
            return Err(Error::DimensionMismatch {
                expected: ns * ny * nx * nz,
                got: table.len(),
            });
        }
        Ok(NsStrategy { table, ns, ny, nx, nz })
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.ns, self.ny, self.nx, self.nz)
    }

    #[inline]
    pub fn index(&self, s: usize, y: usize, x: usize, z: usize) -> usize {
        ((s * self.ny + y) * self.nx + x) * self.nz + z
    }

    #[inline]
    pub fn get(&self, s: usize, y: usize, x: usize, z: usize) -> f64 {
        self.table[self.index(s, y, x, z)]
    }

    /// Identity plumbing: requires |S| = |X| and |Y| = |Z|;
    /// N(x, z | s, y) = 1{x = s} 1{z = y}, so N o W = W.
    pub fn pass_through(ns: usize, ny: usize) -> Self {
        let (nx, nz) = (ns, ny);
        let mut table = vec![0.0; ns * ny * nx * nz];
        for s in 0..ns {
            for y in 0..ny {
                table[((s * ny + y) * nx + s) * nz + y] = 1.0;
            }
        }
        NsStrategy { table, ns, ny, nx, nz }
    }

    /// Ignores the channel entirely: x uniform, z drawn from `d`.
    /// The composition with any channel has all rows equal to `d`.
    pub fn fixed_output(ns: usize, ny: usize, nx: usize, d: &Distribution) -> Self {
        let nz = d.len();
        let mut table = vec![0.0; ns * ny * nx * nz];
        for s in 0..ns {
            for y in 0..ny {
                for x in 0..nx {
                    for z in 0..nz {
                        table[((s * ny + y) * nx + x) * nz + z] = d.get(z) / nx as f64;
                    }
                }
            }
        }
        NsStrategy { table, ns, ny, nx, nz }
    }

    /// A deterministic encoder/decoder pair e: S -> X, d: Y -> Z as a
    /// (shared-randomness, hence non-signaling) strategy.
    pub fn pure_pair(ns: usize, ny: usize, nx: usize, nz: usize, e: &[usize], d: &[usize]) -> Self {
        let mut table = vec![0.0; ns * ny * nx * nz];
        for s in 0..ns {
            for y in 0..ny {
                table[((s * ny + y) * nx + e[s]) * nz + d[y]] = 1.0;
            }
        }
        NsStrategy { table, ns, ny, nx, nz }
    }

    /// Convex mixture of strategies with the given weights.
    pub fn mixture(parts: &[(f64, NsStrategy)]) -> Result<NsStrategy> {
        let (ns, ny, nx, nz) = parts
            .first()
            .map(|(_, n)| n.dims())
            .ok_or(Error::DomainViolation {
                name: "parts",
                value: 0.0,
                domain: "non-empty",
            })?;
        let mut table = vec![0.0; ns * ny * nx * nz];
        for (wgt, part) in parts {
            for (acc, v) in table.iter_mut().zip(&part.table) {
                *acc += wgt * v;
            }
        }
        NsStrategy::from_table(table, ns, ny, nx, nz)
    }

    /// Random valid strategy: a mixture of random pure pairs.
    pub fn random<R: rand::Rng>(
        ns: usize,
        ny: usize,
        nx: usize,
        nz: usize,
        parts: usize,
        rng: &mut R,
    ) -> NsStrategy {
        let mixture: Vec<(f64, NsStrategy)> = (0..parts.max(1))
            .map(|_| {
                let e: Vec<usize> = (0..ns).map(|_| rng.gen_range(0..nx)).collect();
                let d: Vec<usize> = (0..ny).map(|_| rng.gen_range(0..nz)).collect();
                (1.0, NsStrategy::pure_pair(ns, ny, nx, nz, &e, &d))
            })
            .collect();
        let w = 1.0 / mixture.len() as f64;
        let weighted: Vec<(f64, NsStrategy)> =
            mixture.into_iter().map(|(_, p)| (w, p)).collect();
        NsStrategy::mixture(&weighted).expect("non-empty mixture")
    }

    /// Largest violation of each defining equality.
    pub fn residuals(&self) -> NsResiduals {
        let (ns, ny, nx, nz) = self.dims();
        let mut normalization = 0.0_f64;
        let mut negativity = 0.0_f64;
        for s in 0..ns {
            for y in 0..ny {
                let mut sum = 0.0;
                for x in 0..nx {
                    for z in 0..nz {
                        let v = self.get(s, y, x, z);
                        negativity = negativity.max(-v);
                        sum += v;
                    }
                }
                normalization = normalization.max((sum - 1.0).abs());
            }
        }
        // sum_x N(x,z|s,y) must not depend on s
        let mut z_marg = 0.0_f64;
        for y in 0..ny {
            for z in 0..nz {
                let base: f64 = (0..nx).map(|x| self.get(0, y, x, z)).sum();
                for s in 1..ns {
                    let v: f64 = (0..nx).map(|x| self.get(s, y, x, z)).sum();
                    z_marg = z_marg.max((v - base).abs());
                }
            }
        }
        // sum_z N(x,z|s,y) must not depend on y
        let mut x_marg = 0.0_f64;
        for s in 0..ns {
            for x in 0..nx {
                let base: f64 = (0..nz).map(|z| self.get(s, 0, x, z)).sum();
                for y in 1..ny {
                    let v: f64 = (0..nz).map(|z| self.get(s, y, x, z)).sum();
                    x_marg = x_marg.max((v - base).abs());
                }
            }
        }
        NsResiduals {
            normalization,
            z_marginal_vs_s: z_marg,
            x_marginal_vs_y: x_marg,
            negativity,
        }
    }

    /// Input marginal N(x|s), well defined whenever the non-signaling
    /// constraint holds; evaluated at y = 0.
    pub fn marginal_x(&self, s: usize) -> Distribution {
        let v: Vec<f64> = (0..self.nx)
            .map(|x| (0..self.nz).map(|z| self.get(s, 0, x, z)).sum())
            .collect();
        Distribution::normalized(v).expect("strategy rows normalized")
    }

    /// Synthesized conversion channel `(N o W)(z|s) = sum_{x,y} N W(y|x)`.
    pub fn compose(&self, w: &Channel) -> Result<Channel> {
        if w.input_size() != self.nx || w.output_size() != self.ny {
            return Err(Error::DimensionMismatch {
                expected: self.nx * self.ny,
                got: w.input_size() * w.output_size(),
            });
        }
        let mut rows = vec![0.0; self.ns * self.nz];
        for s in 0..self.ns {
            for y in 0..self.ny {
                for x in 0..self.nx {
                    let wyx = w.entry(x, y);
                    if wyx == 0.0 {
                        continue;
                    }
                    for z in 0..self.nz {
                        rows[s * self.nz + z] += self.get(s, y, x, z) * wyx;
                    }
                }
            }
        }
        // renormalize away solver-level drift in the strategy table
        for s in 0..self.ns {
            let row = &mut rows[s * self.nz..(s + 1) * self.nz];
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                for v in row.iter_mut() {
                    *v = v.max(0.0) / sum;
                }
            }
        }
        Channel::new(self.ns, self.nz, rows)
    }
}
