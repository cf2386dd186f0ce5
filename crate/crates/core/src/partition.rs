//! Partitions, worker solutions and ensembles.
//!
//! Cluster labels are 1-based throughout: a partition with `k` clusters
//! uses labels from `1..=k`, and a label in that range may go unused.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// An assignment of every object to one of `k` clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<u32>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<u32>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidPartition("no objects".into()));
        }
        if k == 0 {
            return Err(Error::InvalidPartition("cluster count must be at least 1".into()));
        }
        if let Some((position, &label)) = labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l == 0 || l as usize > k)
        {
            return Err(Error::LabelOutOfRange { label, position, k });
        }
        Ok(Self { labels, k })
    }

    /// Builds a partition whose cluster count is the largest label present.
    pub fn from_labels(labels: Vec<u32>) -> Result<Self> {
        let k = labels.iter().copied().max().unwrap_or(0) as usize;
        Self::new(labels, k)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<u32> {
        self.labels
    }

    /// Declared number of clusters.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of distinct labels actually used.
    pub fn clusters_used(&self) -> usize {
        let mut seen = vec![false; self.k];
        for &l in &self.labels {
            seen[l as usize - 1] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }

    /// True when both partitions group the objects identically, up to a
    /// renaming of labels.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut forward = vec![0u32; self.k + 1];
        let mut backward = vec![0u32; other.k + 1];
        for (&a, &b) in self.labels.iter().zip(&other.labels) {
            let (fa, bb) = (forward[a as usize], backward[b as usize]);
            if fa == 0 && bb == 0 {
                forward[a as usize] = b;
                backward[b as usize] = a;
            } else if fa != b || bb != a {
                return false;
            }
        }
        true
    }
}

/// One worker's answer: a partition of the shared object set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusteringSolution {
    pub worker_id: String,
    pub labels: Partition,
}

impl ClusteringSolution {
    pub fn new(worker_id: impl Into<String>, labels: Partition) -> Self {
        Self {
            worker_id: worker_id.into(),
            labels,
        }
    }
}

/// A validated set of at least two solutions over the same `o` objects,
/// all using the same cluster count `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ensemble {
    num_objects: usize,
    num_clusters: usize,
    solutions: Vec<ClusteringSolution>,
}

impl Ensemble {
    pub fn new(num_clusters: usize, solutions: Vec<ClusteringSolution>) -> Result<Self> {
        if solutions.len() < 2 {
            return Err(Error::InvalidEnsemble(format!(
                "at least 2 solutions are required, got {}",
                solutions.len()
            )));
        }
        if num_clusters == 0 {
            return Err(Error::InvalidEnsemble("cluster count must be at least 1".into()));
        }
        let num_objects = solutions[0].labels.len();
        if num_objects < 2 {
            return Err(Error::InvalidEnsemble(format!(
                "at least 2 objects are required, got {num_objects}"
            )));
        }
        let mut ids = HashSet::with_capacity(solutions.len());
        for (i, s) in solutions.iter().enumerate() {
            if !ids.insert(s.worker_id.as_str()) {
                return Err(Error::InvalidEnsemble(format!(
                    "duplicate worker_id {:?} at solution {i}",
                    s.worker_id
                )));
            }
            if s.labels.len() != num_objects {
                return Err(Error::InvalidEnsemble(format!(
                    "solution {i} ({}) has {} labels, expected {num_objects}",
                    s.worker_id,
                    s.labels.len()
                )));
            }
            if s.labels.k() != num_clusters {
                return Err(Error::InvalidEnsemble(format!(
                    "solution {i} ({}) declares {} clusters, expected {num_clusters}",
                    s.worker_id,
                    s.labels.k()
                )));
            }
        }
        Ok(Self {
            num_objects,
            num_clusters,
            solutions,
        })
    }

    /// Convenience constructor from raw label vectors; workers are named
    /// `w1`, `w2`, ...
    pub fn from_label_vectors(num_clusters: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        let solutions = rows
            .into_iter()
            .enumerate()
            .map(|(i, labels)| {
                Partition::new(labels, num_clusters)
                    .map(|p| ClusteringSolution::new(format!("w{}", i + 1), p))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(num_clusters, solutions)
    }

    pub fn num_objects(&self) -> usize {
        self.num_objects
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn num_solutions(&self) -> usize {
        self.solutions.len()
    }

    pub fn solutions(&self) -> &[ClusteringSolution] {
        &self.solutions
    }

    pub fn into_solutions(self) -> Vec<ClusteringSolution> {
        self.solutions
    }

    pub fn worker_ids(&self) -> impl Iterator<Item = &str> {
        self.solutions.iter().map(|s| s.worker_id.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_labels() {
        assert_eq!(
            Partition::new(vec![1, 3, 2], 2),
            Err(Error::LabelOutOfRange { label: 3, position: 1, k: 2 })
        );
        assert!(matches!(
            Partition::new(vec![0, 1], 2),
            Err(Error::LabelOutOfRange { label: 0, .. })
        ));
        assert!(Partition::new(vec![], 2).is_err());
    }

    #[test]
    fn unused_labels_are_allowed() {
        let p = Partition::new(vec![2, 2, 2], 3).unwrap();
        assert_eq!(p.clusters_used(), 1);
    }

    #[test]
    fn same_grouping_ignores_label_names() {
        let a = Partition::new(vec![1, 1, 2, 3], 3).unwrap();
        let b = Partition::new(vec![3, 3, 1, 2], 3).unwrap();
        let c = Partition::new(vec![1, 2, 2, 3], 3).unwrap();
        assert!(a.same_grouping(&b));
        assert!(!a.same_grouping(&c));
    }

    #[test]
    fn ensemble_validation() {
        assert!(Ensemble::from_label_vectors(2, vec![vec![1, 2]]).is_err());
        assert!(Ensemble::from_label_vectors(2, vec![vec![1], vec![2]]).is_err());
        assert!(Ensemble::from_label_vectors(2, vec![vec![1, 2], vec![2, 1, 1]]).is_err());
        let dup = vec![
            ClusteringSolution::new("a", Partition::new(vec![1, 2], 2).unwrap()),
            ClusteringSolution::new("a", Partition::new(vec![2, 1], 2).unwrap()),
        ];
        assert!(matches!(Ensemble::new(2, dup), Err(Error::InvalidEnsemble(_))));
        let e = Ensemble::from_label_vectors(2, vec![vec![1, 2], vec![2, 1]]).unwrap();
        assert_eq!((e.num_solutions(), e.num_objects()), (2, 2));
    }
}
