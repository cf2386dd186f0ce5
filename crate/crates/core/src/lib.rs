//! Consensus clustering for crowd-sourced partitions.
//!
//! Many workers each split the same objects into `n` groups. The pipeline
//! picks the most representative solution as a labeling reference, renames
//! every other solution to match it, weights solutions by their mean
//! adjusted Rand index to the rest, and then decides each object's label
//! from the stationary distribution of a small Markov chain over the `n`
//! cluster states.
//!
//! ```
//! use crowd_consensus::{consensus, ConsensusConfig, Ensemble};
//!
//! let crowd = Ensemble::from_label_vectors(2, vec![
//!     vec![1, 1, 2, 2],
//!     vec![1, 2, 2, 2],
//!     vec![2, 2, 1, 1],
//! ]).unwrap();
//! let result = consensus(&crowd, &ConsensusConfig::default()).unwrap();
//! assert_eq!(result.labels.labels(), &[1, 1, 2, 2]);
//! ```

pub mod alignment;
pub mod error;
pub mod formats;
pub mod markov;
pub mod matching;
pub mod metrics;
pub mod partition;
pub mod simulation;
pub mod synthetic;

pub use alignment::{align_ensemble, pairwise_ari_matrix, relabel, select_reference, AlignmentReport, Permutation};
pub use error::{Error, Result};
pub use markov::{
    assign_label, assign_label_by_priority, build_transition_matrix, compute_weights, consensus, make_ergodic, plurality_baseline,
    stationary_distribution, ConsensusConfig, ConsensusResult, StationaryDistribution, TransitionMatrix,
    WeightVector,
};
pub use metrics::{
    adjusted_rand_index, compare, contingency, hubert_index, mirkin_index, pair_counts, rand_index,
    ContingencyTable, MetricSet, PairCounts,
};
pub use partition::{ClusteringSolution, Ensemble, Partition};
