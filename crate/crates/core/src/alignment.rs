//! Label correspondence across worker solutions.
//!
//! Worker labels are arbitrary names, so two identical groupings can look
//! different. The solution with the highest mean ARI to the others becomes
//! the reference, and every solution is renamed by the label bijection that
//! maximizes its overlap with the reference (optimal assignment on the
//! contingency table).
//!
//! Ties in the reference choice go to the smallest index.

use crate::error::{Error, Result};
use crate::matching::lex_first_optimal_assignment;
use crate::metrics::{adjusted_rand_index, contingency};
use crate::partition::{ClusteringSolution, Ensemble, Partition};

/// Mean ARI values closer than this to the maximum count as tied.
pub const REFERENCE_TIE_TOLERANCE: f64 = 1e-12;

/// A bijection of the labels `1..=n`; `image(l)` is the new name of `l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((1..=n as u32).collect())
    }

    /// Builds a permutation from the images of `1..=n` in order.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &img in &images {
            if img == 0 || img as usize > n || seen[img as usize - 1] {
                return Err(Error::InvalidPartition(format!(
                    "{images:?} is not a bijection of 1..={n}"
                )));
            }
            seen[img as usize - 1] = true;
        }
        Ok(Self(images))
    }

    pub fn image(&self, label: u32) -> u32 {
        self.0[label as usize - 1]
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &img)| img as usize == i + 1)
    }

    pub fn apply(&self, p: &Partition) -> Partition {
        let labels = p.labels().iter().map(|&l| self.image(l)).collect();
        Partition::new(labels, p.k()).expect("bijection preserves label range")
    }
}

/// Outcome of aligning an ensemble. Indices are 0-based positions in the
/// ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentReport {
    pub reference_index: usize,
    pub pairwise_ari: Vec<Vec<f64>>,
    /// Mean ARI of each solution to all others, before any clamping.
    pub mean_ari: Vec<f64>,
    pub permutations: Vec<Permutation>,
}

/// Symmetric `p x p` matrix of ARI values with unit diagonal.
pub fn pairwise_ari_matrix(e: &Ensemble) -> Result<Vec<Vec<f64>>> {
    let sols = e.solutions();
    let p = sols.len();
    let mut m = vec![vec![1.0; p]; p];
    for i in 0..p {
        for j in i + 1..p {
            let ari = adjusted_rand_index(&sols[i].labels, &sols[j].labels)?;
            m[i][j] = ari;
            m[j][i] = ari;
        }
    }
    Ok(m)
}

/// Row means of a pairwise matrix, excluding the diagonal.
pub fn mean_off_diagonal(matrix: &[Vec<f64>]) -> Vec<f64> {
    let p = matrix.len();
    matrix
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let sum: f64 = row
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != k)
                .map(|(_, &v)| v)
                .sum();
            sum / (p - 1) as f64
        })
        .collect()
}

/// First index whose value is within [`REFERENCE_TIE_TOLERANCE`] of the max.
pub fn select_reference_from_means(means: &[f64]) -> usize {
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    means
        .iter()
        .position(|&m| m >= max - REFERENCE_TIE_TOLERANCE)
        .unwrap_or(0)
}

pub fn select_reference(e: &Ensemble) -> Result<usize> {
    let m = pairwise_ari_matrix(e)?;
    Ok(select_reference_from_means(&mean_off_diagonal(&m)))
}

/// Renames the labels of `s` to maximize agreement with `reference`.
///
/// The bijection maximizes the summed contingency counts on matched label
/// pairs. Ties are broken lexicographically after both partitions are
/// renamed by order of first appearance, so the relabeled vector depends
/// only on how `s` and `reference` group the objects, not on the names they
/// use. Labels that `s` never uses are mapped to the remaining targets in
/// ascending order.
pub fn relabel(s: &Partition, reference: &Partition) -> Result<(Partition, Permutation)> {
    if s.k() != reference.k() {
        return Err(Error::ClusterCountMismatch {
            left: s.k(),
            right: reference.k(),
        });
    }
    let table = contingency(s, reference)?;
    let n = s.k();

    // Columns are taken in the reference's first-appearance order and rows
    // in the solution's, which makes the tie-break independent of the label
    // names on both sides.
    let col_order = first_appearance_order(reference);
    let weights: Vec<Vec<i64>> = (0..n)
        .map(|i| col_order.iter().map(|&j| table.get(i, j) as i64).collect())
        .collect();
    let row_order = first_appearance_order(s);
    let (assignment, _) = lex_first_optimal_assignment(&weights, &row_order);

    let mut images = vec![0u32; n];
    let mut target_taken = vec![false; n];
    let used = s.clusters_used();
    for &i in &row_order[..used] {
        let target = col_order[assignment[i]];
        images[i] = target as u32 + 1;
        target_taken[target] = true;
    }
    let mut free_targets = (0..n).filter(|&t| !target_taken[t]);
    for image in images.iter_mut().filter(|x| **x == 0) {
        *image = free_targets.next().expect("one free target per unused label") as u32 + 1;
    }
    let perm = Permutation(images);
    Ok((perm.apply(s), perm))
}

/// 0-based labels of `p` ordered by first use, followed by unused labels
/// in ascending order.
pub fn first_appearance_order(p: &Partition) -> Vec<usize> {
    let n = p.k();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    for &l in p.labels() {
        let i = l as usize - 1;
        if !placed[i] {
            placed[i] = true;
            order.push(i);
        }
    }
    order.extend((0..n).filter(|&i| !placed[i]));
    order
}

/// Selects the reference solution and relabels every solution against it.
pub fn align_ensemble(e: &Ensemble) -> Result<(Ensemble, AlignmentReport)> {
    let pairwise_ari = pairwise_ari_matrix(e)?;
    let mean_ari = mean_off_diagonal(&pairwise_ari);
    let reference_index = select_reference_from_means(&mean_ari);
    let reference = &e.solutions()[reference_index].labels;

    let mut solutions = Vec::with_capacity(e.num_solutions());
    let mut permutations = Vec::with_capacity(e.num_solutions());
    for (i, s) in e.solutions().iter().enumerate() {
        let (labels, perm) = if i == reference_index {
            (s.labels.clone(), Permutation::identity(e.num_clusters()))
        } else {
            relabel(&s.labels, reference)?
        };
        solutions.push(ClusteringSolution::new(s.worker_id.clone(), labels));
        permutations.push(perm);
    }
    let aligned = Ensemble::new(e.num_clusters(), solutions)?;
    Ok((
        aligned,
        AlignmentReport {
            reference_index,
            pairwise_ari,
            mean_ari,
            permutations,
        },
    ))
}
