use crate::channel::Channel;
use crate::dist::Distribution;
use rand::Rng;

/// Uniform sample from the probability simplex (Dirichlet(1,...,1)) via
/// normalized exponentials.
pub fn random_distribution<R: Rng>(k: usize, rng: &mut R) -> Distribution {
    let mut w: Vec<f64> = (0..k).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    Distribution::normalized(w).expect("positive weights")
}

/// Channel with rows sampled independently from the simplex.
pub fn random_channel<R: Rng>(nin: usize, nout: usize, rng: &mut R) -> Channel {
    let rows: Vec<Vec<f64>> = (0..nin)
        .map(|_| random_distribution(nout, rng).probs().to_vec())
        .collect();
    Channel::from_rows(rows).expect("rows are distributions")
}

/// Row-stochastic post-processing map, same thing as a channel.
pub fn random_stochastic_map<R: Rng>(nin: usize, nout: usize, rng: &mut R) -> Channel {
    random_channel(nin, nout, rng)
}
