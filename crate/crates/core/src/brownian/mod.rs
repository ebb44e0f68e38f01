//! Monte Carlo for the diffusion: exact jump chain and Walsh-type SDE sampler.
//!
//! Every walker draws from its own ChaCha8 stream `(seed, walker index)`, and
//! per-walker results are merged in a fixed order, so outputs do not depend
//! on the number of worker threads.

mod ctmc;
mod exit;
mod green;
mod sde;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use ctmc::{sample_ctmc, JumpChain};
pub use exit::{exit_distribution, ExitLaw};
pub use green::{green_estimate, GreenCurve};
pub use sde::{sample_sde, walsh_weights, SdeOptions};

/// Deterministic per-walker generator.
pub(crate) fn walker_rng(seed: u64, walker: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(walker);
    rng
}

/// Walker counts per degree of freedom.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    pub counts: Vec<u64>,
    pub total: u64,
    /// Walkers removed by an absorbing boundary.
    pub killed: u64,
    /// Walkers stuck on a node with zero exit rate.
    pub frozen: u64,
    #[serde(skip)]
    pub masses: Vec<f64>,
}

impl EmpiricalMeasure {
    pub(crate) fn empty(masses: &[f64]) -> Self {
        EmpiricalMeasure { counts: vec![0; masses.len()], total: 0, killed: 0, frozen: 0, masses: masses.to_vec() }
    }

    pub(crate) fn merge(mut self, other: EmpiricalMeasure) -> Self {
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        self.total += other.total;
        self.killed += other.killed;
        self.frozen += other.frozen;
        self
    }

    pub fn survivors(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Fraction of walkers per node.
    pub fn probabilities(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }

    /// Empirical density against the lumped measure.
    pub fn density(&self) -> Vec<f64> {
        self.probabilities().iter().zip(&self.masses).map(|(p, m)| p / m).collect()
    }

    /// Binomial standard error of the density per node, using `p` as the reference probability.
    pub fn density_sigma(&self, p: &[f64]) -> Vec<f64> {
        let n = self.total as f64;
        p.iter().zip(&self.masses).map(|(p, m)| (p * (1.0 - p) / n).max(0.0).sqrt() / m).collect()
    }

    /// Total-variation distance to another measure on the same nodes.
    pub fn total_variation(&self, other: &EmpiricalMeasure) -> f64 {
        0.5 * self.probabilities().iter().zip(other.probabilities()).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}
