//! Per-object Markov chain consensus.
//!
//! For every object a chain over the `n` cluster states is built from the
//! aligned worker labels. Each solution is weighted by its mean ARI to the
//! rest. The chain is made row-stochastic, and the object's consensus label
//! is the argmax of its stationary distribution.

use serde::{Deserialize, Serialize};

use crate::alignment::{align_ensemble, first_appearance_order, mean_off_diagonal, pairwise_ari_matrix};
use crate::error::{Error, Result};
use crate::partition::{Ensemble, Partition};

/// Stationary probabilities closer than this to the maximum count as tied.
pub const LABEL_TIE_TOLERANCE: f64 = 1e-9;

const STOCHASTIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsensusConfig {
    /// Power iteration stops once the L1 change between steps drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight of the uniform blend applied after the ergodic lift; 0 leaves
    /// the lifted matrix unchanged.
    pub damping: f64,
    /// Raw mean-ARI weights below this value are raised to it before
    /// normalization.
    pub weight_floor: f64,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 1000,
            damping: 1e-6,
            weight_floor: 0.0,
        }
    }
}

impl ConsensusConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidConfig(format!(
                "damping must lie in [0, 1), got {}",
                self.damping
            )));
        }
        if !(0.0..=1.0).contains(&self.weight_floor) {
            return Err(Error::InvalidConfig(format!(
                "weight_floor must lie in [0, 1], got {}",
                self.weight_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    /// Mean ARI of each solution to the others.
    pub raw: Vec<f64>,
    /// Clamped and normalized to sum to 1.
    pub normalized: Vec<f64>,
}

impl WeightVector {
    /// Clamps raw weights from below at `floor` and normalizes. Falls back
    /// to uniform weights when every clamped value is zero.
    pub fn from_raw(raw: Vec<f64>, floor: f64) -> Self {
        let clamped: Vec<f64> = raw.iter().map(|&w| w.max(floor)).collect();
        let total: f64 = clamped.iter().sum();
        let normalized = if total > 0.0 {
            clamped.iter().map(|&w| w / total).collect()
        } else {
            vec![1.0 / raw.len() as f64; raw.len()]
        };
        Self { raw, normalized }
    }

    pub fn uniform(p: usize) -> Self {
        Self {
            raw: vec![1.0; p],
            normalized: vec![1.0 / p as f64; p],
        }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }
}

/// Weights each solution by its mean ARI to the rest, negatives clamped to 0.
pub fn compute_weights(e: &Ensemble) -> Result<WeightVector> {
    let m = pairwise_ari_matrix(e)?;
    Ok(WeightVector::from_raw(mean_off_diagonal(&m), 0.0))
}

/// Dense `n x n` matrix over cluster states; state `i` is label `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidMatrix(format!("row {i} has length {}, expected {n}", rows[i].len())));
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Row vector times matrix.
    pub fn left_multiply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &t) in out.iter_mut().zip(self.row(i)) {
                *o += vi * t;
            }
        }
        out
    }

    fn check_stochastic(&self) -> Result<()> {
        for i in 0..self.n {
            let row = self.row(i);
            if let Some(j) = row.iter().position(|&x| !x.is_finite() || x < 0.0) {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({i}, {j}) = {} is not a probability",
                    row[j]
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::InvalidMatrix(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(())
    }
}

/// Accumulates the co-labeling chain for one object (0-based `object`).
///
/// Every solution takes a turn as the fixed reference `k`. For each other
/// solution `m`, the weight of `m` is added to the cell
/// `(label_k, label_m)`. The ensemble must already be aligned.
pub fn build_transition_matrix(aligned: &Ensemble, w: &WeightVector, object: usize) -> TransitionMatrix {
    let n = aligned.num_clusters();
    let labels: Vec<usize> = aligned
        .solutions()
        .iter()
        .map(|s| s.labels.labels()[object] as usize - 1)
        .collect();
    let mut t = TransitionMatrix::zeros(n);
    for (k, &from) in labels.iter().enumerate() {
        for (m, &to) in labels.iter().enumerate() {
            if k != m {
                t.entries[from * n + to] += w.normalized[m];
            }
        }
    }
    t
}

/// Turns a nonnegative matrix into a row-stochastic one.
///
/// Rows summing to more than 1 are first scaled down to sum 1. Each row
/// then gains `(1 - rowsum) / n` in every entry, and finally the matrix is
/// blended with the uniform matrix: `T <- (1 - damping) T + damping / n`.
/// With `damping = 0` and row sums at most 1 this is exactly the lift
/// `T_ij + (1 - sum_j T_ij) / n`.
pub fn make_ergodic(t: &TransitionMatrix, damping: f64) -> Result<TransitionMatrix> {
    if !(0.0..1.0).contains(&damping) {
        return Err(Error::InvalidConfig(format!("damping must lie in [0, 1), got {damping}")));
    }
    let n = t.n;
    let mut out = t.clone();
    let uniform = 1.0 / n as f64;
    for i in 0..n {
        let row = out.row_mut(i);
        if let Some(j) = row.iter().position(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidMatrix(format!(
                "entry ({i}, {j}) = {} must be finite and nonnegative",
                row[j]
            )));
        }
        let sum: f64 = row.iter().sum();
        if sum > 1.0 {
            row.iter_mut().for_each(|x| *x /= sum);
        } else {
            let lift = (1.0 - sum) / n as f64;
            row.iter_mut().for_each(|x| *x += lift);
        }
        if damping > 0.0 {
            row.iter_mut()
                .for_each(|x| *x = (1.0 - damping) * *x + damping * uniform);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub probs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration from the uniform distribution.
///
/// Slowly mixing chains (second eigenvalue close to 1 in modulus) can hit
/// `max_iterations` first. The balance equations are then solved directly;
/// that solution is returned, marked converged, if its residual is below
/// the tolerance. `iterations` always counts power steps.
pub fn stationary_distribution(t: &TransitionMatrix, cfg: &ConsensusConfig) -> Result<StationaryDistribution> {
    cfg.validate()?;
    t.check_stochastic()?;
    let n = t.n;
    let mut sd = vec![1.0 / n as f64; n];
    for it in 1..=cfg.max_iterations {
        let mut next = t.left_multiply(&sd);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let change: f64 = next.iter().zip(&sd).map(|(a, b)| (a - b).abs()).sum();
        sd = next;
        if change < cfg.tolerance {
            return Ok(StationaryDistribution {
                probs: sd,
                iterations: it,
                converged: true,
            });
        }
    }
    let direct = solve_balance(t).filter(|p| residual(t, p) < cfg.tolerance);
    Ok(StationaryDistribution {
        converged: direct.is_some(),
        probs: direct.unwrap_or(sd),
        iterations: cfg.max_iterations,
    })
}

fn residual(t: &TransitionMatrix, p: &[f64]) -> f64 {
    t.left_multiply(p).iter().zip(p).map(|(a, b)| (a - b).abs()).sum()
}

/// Solves `p (T - I) = 0`, `sum p = 1` by Gaussian elimination with partial
/// pivoting. `None` if the system is singular or the solution is not a
/// distribution.
fn solve_balance(t: &TransitionMatrix) -> Option<Vec<f64>> {
    let n = t.n;
    // Row i of the system is column i of (T - I); the last equation is
    // replaced by the normalization.
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| t.get(j, i) - if i == j { 1.0 } else { 0.0 }).collect();
            row.push(0.0);
            row
        })
        .collect();
    a[n - 1] = vec![1.0; n + 1];
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < f64::EPSILON {
            return None;
        }
        a.swap(col, pivot);
        let (done, rest) = a.split_at_mut(col + 1);
        let pivot_row = &done[col];
        for row in rest {
            let f = row[col] / pivot_row[col];
            if f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    let mut p = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|c| a[r][c] * p[c]).sum();
        p[r] = (a[r][n] - tail) / a[r][r];
    }
    if p.iter().any(|x| !x.is_finite() || *x < -1e-12) {
        return None;
    }
    p.iter_mut().for_each(|x| *x = x.max(0.0));
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Some(p)
}

/// Index of the largest probability as a 1-based label. Values within
/// [`LABEL_TIE_TOLERANCE`] of the maximum are tied; the smallest label wins.
pub fn assign_label(sd: &StationaryDistribution) -> u32 {
    argmax_label(&sd.probs)
}

/// Like [`assign_label`], but ties go to whichever tied label comes first in
/// `priority` (0-based labels, a permutation of `0..n`).
pub fn assign_label_by_priority(sd: &StationaryDistribution, priority: &[usize]) -> u32 {
    let max = sd.probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let i = priority
        .iter()
        .copied()
        .find(|&i| sd.probs[i] >= max - LABEL_TIE_TOLERANCE)
        .unwrap_or(0);
    i as u32 + 1
}

pub(crate) fn argmax_label(values: &[f64]) -> u32 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let i = values
        .iter()
        .position(|&v| v >= max - LABEL_TIE_TOLERANCE)
        .unwrap_or(0);
    i as u32 + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusResult {
    pub labels: Partition,
    pub distributions: Vec<StationaryDistribution>,
    pub weights: WeightVector,
    /// 0-based position of the reference solution.
    pub reference_index: usize,
    pub worker_ids: Vec<String>,
    pub config: ConsensusConfig,
}

impl ConsensusResult {
    pub fn reference_worker(&self) -> &str {
        &self.worker_ids[self.reference_index]
    }

    pub fn iterations(&self) -> Vec<usize> {
        self.distributions.iter().map(|d| d.iterations).collect()
    }
}

/// Runs alignment, weighting and the per-object chains.
///
/// Stationary probabilities that tie resolve to the label the reference
/// solution uses first, so renaming the reference's labels renames the
/// output consistently. With a reference whose labels appear in ascending
/// order this is the smallest tied label.
pub fn consensus(e: &Ensemble, cfg: &ConsensusConfig) -> Result<ConsensusResult> {
    cfg.validate()?;
    let (aligned, report) = align_ensemble(e)?;
    let weights = WeightVector::from_raw(report.mean_ari.clone(), cfg.weight_floor);
    let priority = first_appearance_order(&aligned.solutions()[report.reference_index].labels);

    let mut labels = Vec::with_capacity(aligned.num_objects());
    let mut distributions = Vec::with_capacity(aligned.num_objects());
    for y in 0..aligned.num_objects() {
        let t = build_transition_matrix(&aligned, &weights, y);
        let t = make_ergodic(&t, cfg.damping)?;
        let sd = stationary_distribution(&t, cfg)?;
        labels.push(assign_label_by_priority(&sd, &priority));
        distributions.push(sd);
    }

    Ok(ConsensusResult {
        labels: Partition::new(labels, aligned.num_clusters())?,
        distributions,
        weights,
        reference_index: report.reference_index,
        worker_ids: e.worker_ids().map(str::to_owned).collect(),
        config: *cfg,
    })
}

/// Weighted plurality vote per object over an aligned ensemble.
pub fn plurality_baseline(aligned: &Ensemble, w: &WeightVector) -> Partition {
    let n = aligned.num_clusters();
    let labels = (0..aligned.num_objects())
        .map(|y| {
            let mut votes = vec![0.0; n];
            for (s, &wm) in aligned.solutions().iter().zip(&w.normalized) {
                votes[s.labels.labels()[y] as usize - 1] += wm;
            }
            argmax_label(&votes)
        })
        .collect();
    Partition::new(labels, n).expect("votes index valid labels")
}
