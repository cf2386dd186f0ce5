//! Repeated synthetic-crowd trials comparing the Markov consensus against
//! individual workers and a weighted plurality vote.

use serde::{Deserialize, Serialize};

use crate::alignment::align_ensemble;
use crate::error::{Error, Result};
use crate::markov::{consensus, plurality_baseline, ConsensusConfig, WeightVector};
use crate::metrics::adjusted_rand_index;
use crate::synthetic::{balanced_truth, generate_synthetic};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub objects: usize,
    pub clusters: usize,
    pub workers: usize,
    pub noise: f64,
    pub seed: u64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: usize,
    pub seed: u64,
    pub consensus_ari: f64,
    pub baseline_ari: f64,
    pub worker_ari_median: f64,
    pub worker_ari_mean: f64,
    pub worker_ari_min: f64,
    pub worker_ari_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub config: SimulationConfig,
    pub trials: Vec<TrialSummary>,
    /// Trials where the consensus ARI to truth is at least the median worker's.
    pub consensus_at_least_median_worker: usize,
    /// Trials where the consensus ARI to truth is at least the baseline's.
    pub consensus_at_least_baseline: usize,
    pub mean_consensus_ari: f64,
    pub mean_baseline_ari: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

pub fn run_trial(sim: &SimulationConfig, trial: usize, cfg: &ConsensusConfig) -> Result<TrialSummary> {
    let seed = sim.seed.wrapping_add(trial as u64);
    let truth = balanced_truth(sim.objects, sim.clusters, seed)?;
    let crowd = generate_synthetic(&truth, sim.workers, sim.noise, seed ^ 0x5eed_c0ff_ee00_0001)?;

    let result = consensus(&crowd, cfg)?;
    let (aligned, report) = align_ensemble(&crowd)?;
    let weights = WeightVector::from_raw(report.mean_ari, cfg.weight_floor);
    let baseline = plurality_baseline(&aligned, &weights);

    let mut worker_ari = crowd
        .solutions()
        .iter()
        .map(|s| adjusted_rand_index(&s.labels, &truth))
        .collect::<Result<Vec<_>>>()?;
    worker_ari.sort_by(f64::total_cmp);

    Ok(TrialSummary {
        trial,
        seed,
        consensus_ari: adjusted_rand_index(&result.labels, &truth)?,
        baseline_ari: adjusted_rand_index(&baseline, &truth)?,
        worker_ari_median: median(&worker_ari),
        worker_ari_mean: worker_ari.iter().sum::<f64>() / worker_ari.len() as f64,
        worker_ari_min: worker_ari[0],
        worker_ari_max: worker_ari[worker_ari.len() - 1],
    })
}

pub fn simulate(sim: &SimulationConfig, cfg: &ConsensusConfig) -> Result<SimulationSummary> {
    if sim.trials == 0 {
        return Err(Error::InvalidConfig("at least one trial is required".into()));
    }
    let trials = (0..sim.trials)
        .map(|t| run_trial(sim, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    let count = |f: fn(&TrialSummary) -> bool| trials.iter().filter(|t| f(t)).count();
    let n = trials.len() as f64;
    Ok(SimulationSummary {
        config: *sim,
        consensus_at_least_median_worker: count(|t| t.consensus_ari >= t.worker_ari_median),
        consensus_at_least_baseline: count(|t| t.consensus_ari >= t.baseline_ari),
        mean_consensus_ari: trials.iter().map(|t| t.consensus_ari).sum::<f64>() / n,
        mean_baseline_ari: trials.iter().map(|t| t.baseline_ari).sum::<f64>() / n,
        trials,
    })
}
