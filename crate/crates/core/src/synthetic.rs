//! Seeded synthetic crowds: noisy copies of a ground-truth partition.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::partition::{ClusteringSolution, Ensemble, Partition};

/// A balanced ground truth: `objects` split as evenly as possible over
/// `clusters` labels, in seeded random order.
pub fn balanced_truth(objects: usize, clusters: usize, seed: u64) -> Result<Partition> {
    if clusters == 0 {
        return Err(Error::InvalidConfig("cluster count must be at least 1".into()));
    }
    let mut labels: Vec<u32> = (0..objects).map(|i| (i % clusters) as u32 + 1).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Partition::new(labels, clusters)
}

/// `workers` noisy copies of `truth`. Each object is independently moved,
/// with probability `noise`, to one of the other `k - 1` labels chosen
/// uniformly. Workers are named `w01`, `w02`, ...
pub fn generate_synthetic(truth: &Partition, workers: usize, noise: f64, seed: u64) -> Result<Ensemble> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::InvalidConfig(format!("noise must lie in [0, 1], got {noise}")));
    }
    let k = truth.k();
    if k < 2 && noise > 0.0 {
        return Err(Error::InvalidConfig("noise needs at least 2 clusters".into()));
    }
    let width = workers.to_string().len().max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let solutions = (1..=workers)
        .map(|w| {
            let labels = truth
                .labels()
                .iter()
                .map(|&l| {
                    if noise > 0.0 && rng.random::<f64>() < noise {
                        let other = rng.random_range(1..k as u32);
                        if other >= l {
                            other + 1
                        } else {
                            other
                        }
                    } else {
                        l
                    }
                })
                .collect();
            Partition::new(labels, k).map(|p| ClusteringSolution::new(format!("w{w:0width$}"), p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(k, solutions)
}
