mod support;

use crowd_consensus::{consensus, ConsensusConfig, Ensemble};
use support::{all_label_vectors, literal_consensus, q, random_rows, rng, to_f64};

fn check(k: u32, rows: Vec<Vec<u32>>, cfg: &ConsensusConfig) {
    let damping = q((cfg.damping * 1e6).round() as i64, 1_000_000);
    let oracle = literal_consensus(k, &rows, &damping);
    let e = Ensemble::from_label_vectors(k as usize, rows.clone()).unwrap();
    let r = consensus(&e, cfg).unwrap();

    assert_eq!(r.reference_index, oracle.reference, "reference for {rows:?}");
    for (w, ow) in r.weights.normalized.iter().zip(&oracle.weights) {
        assert!((w - to_f64(ow)).abs() < 1e-12, "weights for {rows:?}");
    }
    assert_eq!(r.labels.labels(), &oracle.labels[..], "labels for {rows:?}");
    for (sd, exact) in r.distributions.iter().zip(&oracle.distributions) {
        for (x, y) in sd.probs.iter().zip(exact) {
            assert!((x - to_f64(y)).abs() < 1e-8, "distribution for {rows:?}: {:?}", sd.probs);
        }
    }
}

#[test]
fn exhaustive_three_workers_two_clusters() {
    let cfg = ConsensusConfig::default();
    let mut checked = 0;
    for o in 2..=4 {
        let vectors = all_label_vectors(o, 2);
        for a in &vectors {
            for b in &vectors {
                for c in &vectors {
                    check(2, vec![a.clone(), b.clone(), c.clone()], &cfg);
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 64 + 512 + 4096);
}

#[test]
fn random_small_ensembles_with_three_clusters() {
    let cfg = ConsensusConfig::default();
    let mut g = rng(17);
    for _ in 0..300 {
        let rows = random_rows(&mut g, 4, 5, 3);
        check(3, rows, &cfg);
    }
}

#[test]
fn derived_fixture() {
    let rows = vec![vec![1, 1, 2, 2], vec![1, 2, 2, 2], vec![1, 1, 2, 2]];
    let oracle = literal_consensus(2, &rows, &q(1, 1_000_000));
    assert_eq!(oracle.labels, vec![1, 1, 2, 2]);
    assert_eq!(oracle.weights, vec![q(1, 2), q(0, 1), q(1, 2)]);
    check(2, rows, &ConsensusConfig::default());
}
