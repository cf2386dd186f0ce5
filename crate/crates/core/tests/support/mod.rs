//! Test-only oracles, written independently of the library's code paths.
#![allow(dead_code, clippy::needless_range_loop)]

use num::{BigInt, BigRational, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Every label vector of length `o` over `1..=k`.
pub fn all_label_vectors(o: usize, k: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..o {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (1..=k).map(move |l| {
                    let mut v = prefix.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    out
}

/// (a, b, c, d) by looping over every unordered pair of objects.
pub fn brute_pairs(u: &[u32], v: &[u32]) -> (u64, u64, u64, u64) {
    let (mut a, mut b, mut c, mut d) = (0, 0, 0, 0);
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            match (u[i] == u[j], v[i] == v[j]) {
                (true, true) => a += 1,
                (true, false) => b += 1,
                (false, true) => c += 1,
                (false, false) => d += 1,
            }
        }
    }
    (a, b, c, d)
}

/// ARI as the exact ratio 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d)).
/// A vanishing denominator means both partitions are trivial; they agree
/// exactly when no pair is split by only one of them.
pub fn brute_ari_ratio(u: &[u32], v: &[u32]) -> (i128, i128) {
    let (a, b, c, d) = brute_pairs(u, v);
    let (a, b, c, d) = (a as i128, b as i128, c as i128, d as i128);
    let den = (a + b) * (b + d) + (a + c) * (c + d);
    if den == 0 {
        return (if b == 0 && c == 0 { 1 } else { 0 }, 1);
    }
    (2 * (a * d - b * c), den)
}

pub fn brute_ari(u: &[u32], v: &[u32]) -> f64 {
    let (n, d) = brute_ari_ratio(u, v);
    n as f64 / d as f64
}

pub fn brute_ari_exact(u: &[u32], v: &[u32]) -> Q {
    let (n, d) = brute_ari_ratio(u, v);
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn permutations(n: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, n);
            out.push(v);
        }
    }
    out
}

fn agreement(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x == y).count()
}

/// Renames labels by order of first appearance: the first label seen
/// becomes 1, the next new one 2, ... Returns the renamed vector and the
/// map back to the original names (`back[new - 1] = old`).
pub fn canonical_form(v: &[u32], k: u32) -> (Vec<u32>, Vec<u32>) {
    let mut back: Vec<u32> = Vec::new();
    let renamed = v
        .iter()
        .map(|&l| match back.iter().position(|&b| b == l) {
            Some(i) => i as u32 + 1,
            None => {
                back.push(l);
                back.len() as u32
            }
        })
        .collect();
    back.extend((1..=k).filter(|l| !v.contains(l)));
    (renamed, back)
}

/// Relabeling by exhaustive search over all label bijections: maximize the
/// number of objects whose new label equals the reference's. Ties go to the
/// lexicographically smallest vector when the reference is written in its
/// first-appearance naming.
pub fn brute_relabel(s: &[u32], r: &[u32], k: u32) -> Vec<u32> {
    let (r_canon, back) = canonical_form(r, k);
    let best = permutations(k)
        .into_iter()
        .map(|perm| s.iter().map(|&l| perm[l as usize - 1]).collect::<Vec<u32>>())
        .max_by(|x, y| {
            agreement(x, &r_canon)
                .cmp(&agreement(y, &r_canon))
                .then_with(|| y.cmp(x))
        })
        .unwrap();
    best.into_iter().map(|l| back[l as usize - 1]).collect()
}

/// Stationary vector of a row-stochastic matrix by exact elimination on
/// pi (T - I) = 0 with sum(pi) = 1. Requires a unique solution.
pub fn exact_stationary(t: &[Vec<Q>]) -> Vec<Q> {
    let n = t.len();
    // Unknowns pi_0..pi_{n-1}; equations: for each column j (except the
    // last, replaced by normalization) sum_i pi_i (T_ij - [i == j]) = 0.
    let mut m: Vec<Vec<Q>> = Vec::with_capacity(n);
    for j in 0..n - 1 {
        let mut row: Vec<Q> = (0..n)
            .map(|i| {
                let mut x = t[i][j].clone();
                if i == j {
                    x -= Q::one();
                }
                x
            })
            .collect();
        row.push(Q::zero());
        m.push(row);
    }
    let mut norm = vec![Q::one(); n];
    norm.push(Q::one());
    m.push(norm);

    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).expect("unique stationary vector");
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= p.clone();
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(pivot_row) {
                    *x -= f.clone() * y;
                }
            }
        }
    }
    m.into_iter().map(|row| row[n].clone()).collect()
}

pub struct LiteralOutcome {
    pub reference: usize,
    pub weights: Vec<Q>,
    pub aligned: Vec<Vec<u32>>,
    pub labels: Vec<u32>,
    pub distributions: Vec<Vec<Q>>,
}

/// Literal step-by-step consensus in exact arithmetic.
///
/// Reference: largest mean ARI, first index on ties. Relabel every other
/// solution against it. Weights: mean ARI clamped at 0, normalized (uniform
/// if all zero). For each object: T[l_k][l_m] += w_m over ordered pairs
/// k != m; rows summing above 1 are scaled to 1, otherwise every entry gains
/// (1 - rowsum)/n; blend with uniform by `damping`; the label is the argmax
/// of the exact stationary vector, ties going to the label the reference
/// uses first.
pub fn literal_consensus(k: u32, rows: &[Vec<u32>], damping: &Q) -> LiteralOutcome {
    let p = rows.len();
    let n = k as usize;
    let o = rows[0].len();

    let mean: Vec<Q> = (0..p)
        .map(|a| {
            let mut s = Q::zero();
            for b in 0..p {
                if a != b {
                    s += brute_ari_exact(&rows[a], &rows[b]);
                }
            }
            s / Q::from_integer(BigInt::from(p as i64 - 1))
        })
        .collect();
    let mut reference = 0;
    for i in 1..p {
        if mean[i] > mean[reference] {
            reference = i;
        }
    }

    let aligned: Vec<Vec<u32>> = (0..p)
        .map(|i| {
            if i == reference {
                rows[i].clone()
            } else {
                brute_relabel(&rows[i], &rows[reference], k)
            }
        })
        .collect();

    let clamped: Vec<Q> = mean
        .iter()
        .map(|w| if w.is_negative() { Q::zero() } else { w.clone() })
        .collect();
    let total: Q = clamped.iter().cloned().fold(Q::zero(), |a, b| a + b);
    let weights: Vec<Q> = if total.is_zero() {
        vec![q(1, p as i64); p]
    } else {
        clamped.iter().map(|w| w / &total).collect()
    };

    let n_q = Q::from_integer(BigInt::from(n as i64));
    let mut labels = Vec::with_capacity(o);
    let mut distributions = Vec::with_capacity(o);
    for y in 0..o {
        let mut t = vec![vec![Q::zero(); n]; n];
        for a in 0..p {
            for b in 0..p {
                if a != b {
                    let (i, j) = (aligned[a][y] as usize - 1, aligned[b][y] as usize - 1);
                    t[i][j] += weights[b].clone();
                }
            }
        }
        for row in t.iter_mut() {
            let sum: Q = row.iter().cloned().fold(Q::zero(), |a, b| a + b);
            if sum > Q::one() {
                for x in row.iter_mut() {
                    *x /= sum.clone();
                }
            } else {
                let lift = (Q::one() - sum) / n_q.clone();
                for x in row.iter_mut() {
                    *x += lift.clone();
                }
            }
            for x in row.iter_mut() {
                *x = (Q::one() - damping) * x.clone() + damping / n_q.clone();
            }
        }
        let sd = exact_stationary(&t);
        // exact ties go to the label the reference uses first
        let (_, reference_order) = canonical_form(&rows[reference], k);
        let mut best = reference_order[0] as usize - 1;
        for &l in &reference_order[1..] {
            let i = l as usize - 1;
            if sd[i] > sd[best] {
                best = i;
            }
        }
        labels.push(best as u32 + 1);
        distributions.push(sd);
    }

    LiteralOutcome {
        reference,
        weights,
        aligned,
        labels,
        distributions,
    }
}

pub fn to_f64(x: &Q) -> f64 {
    use num::ToPrimitive;
    x.to_f64().unwrap()
}

/// Random label matrix: `p` workers, `o` objects, `k` clusters.
pub fn random_rows(rng: &mut ChaCha8Rng, p: usize, o: usize, k: u32) -> Vec<Vec<u32>> {
    (0..p)
        .map(|_| (0..o).map(|_| rng.random_range(1..=k)).collect())
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random bijection of `1..=k`.
pub fn random_bijection(rng: &mut ChaCha8Rng, k: u32) -> Vec<u32> {
    use rand::seq::SliceRandom;
    let mut v: Vec<u32> = (1..=k).collect();
    v.shuffle(rng);
    v
}

/// Published scores as (method, ARI, RI, MI, HI).
pub const PUBLISHED_SCORES: [(&str, f64, f64, f64, f64); 5] = [
    ("CSPA", 0.1579, 0.5941, 0.4059, 0.1883),
    ("HGPA", 0.1482, 0.5216, 0.4784, 0.0431),
    ("MCLA", 0.0118, 0.5985, 0.4015, 0.1971),
    ("BCE", 0.0830, 0.5616, 0.4384, 0.1232),
    ("Proposed", 0.1767, 0.6071, 0.3929, 0.2141),
];

/// A randomized crowd: noisy copies of a random base partition, each worker
/// then renamed by a random bijection. `o <= 50`, `p <= 10`, `k <= 5`.
pub fn random_crowd(rng: &mut ChaCha8Rng) -> (u32, Vec<Vec<u32>>) {
    let o = rng.random_range(2..=50usize);
    let p = rng.random_range(2..=10usize);
    let k = rng.random_range(2..=5u32);
    let noise = rng.random_range(0.0..0.7);
    let base: Vec<u32> = (0..o).map(|_| rng.random_range(1..=k)).collect();
    let rows = (0..p)
        .map(|_| {
            let perm = random_bijection(rng, k);
            base.iter()
                .map(|&l| {
                    let l = if rng.random::<f64>() < noise { rng.random_range(1..=k) } else { l };
                    perm[l as usize - 1]
                })
                .collect()
        })
        .collect();
    (k, rows)
}

/// Random nonnegative matrix whose rows sum to 0, below 1, exactly 1 or
/// above 1.
pub fn random_nonnegative_rows(rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rng.random_range(1..=8usize);
    (0..n)
        .map(|_| {
            let kind = rng.random_range(0..4);
            let raw: Vec<f64> = (0..n)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() })
                .collect();
            let sum: f64 = raw.iter().sum();
            let target = match kind {
                0 => 0.0,
                1 => rng.random_range(0.0..1.0),
                2 => 1.0,
                _ => rng.random_range(1.0..(n as f64 * 3.0 + 1.5)),
            };
            if sum == 0.0 || target == 0.0 {
                vec![0.0; n]
            } else {
                raw.iter().map(|x| x * target / sum).collect()
            }
        })
        .collect()
}

#[derive(Debug, Default, Clone, Copy)]
pub struct InvariantTally {
    pub unanimity_checked: usize,
    pub order_checked: usize,
}

/// Checks unanimity, label-permutation invariance and worker-order
/// invariance for one crowd. Returns the violations found.
pub fn invariant_violations(
    k: u32,
    rows: &[Vec<u32>],
    rng: &mut ChaCha8Rng,
    tally: &mut InvariantTally,
) -> Vec<String> {
    use crowd_consensus::{align_ensemble, consensus, ConsensusConfig, Ensemble};
    use rand::seq::SliceRandom;

    let cfg = ConsensusConfig::default();
    let kk = k as usize;
    let e = Ensemble::from_label_vectors(kk, rows.to_vec()).unwrap();
    let base = consensus(&e, &cfg).unwrap();
    let mut out = Vec::new();

    // unanimity over aligned labels
    let (aligned, report) = align_ensemble(&e).unwrap();
    for y in 0..e.num_objects() {
        let first = aligned.solutions()[0].labels.labels()[y];
        if aligned.solutions().iter().all(|s| s.labels.labels()[y] == first) {
            tally.unanimity_checked += 1;
            if base.labels.labels()[y] != first {
                out.push(format!("unanimity: object {y} agreed {first}, got {}", base.labels.labels()[y]));
            }
        }
    }

    // rename one worker's labels
    let victim = rng.random_range(0..rows.len());
    let perm = random_bijection(rng, k);
    let mut renamed = rows.to_vec();
    renamed[victim] = rows[victim].iter().map(|&l| perm[l as usize - 1]).collect();
    let e2 = Ensemble::from_label_vectors(kk, renamed).unwrap();
    let after = consensus(&e2, &cfg).unwrap();
    if !base.labels.same_grouping(&after.labels) {
        out.push(format!(
            "permutation: renaming worker {victim} changed tau {:?} -> {:?}",
            base.labels.labels(),
            after.labels.labels()
        ));
    }

    // shuffle worker order, keeping ids attached
    let mut sorted = report.mean_ari.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if sorted[0] - sorted[1] > 1e-9 {
        tally.order_checked += 1;
        let mut solutions = e.solutions().to_vec();
        solutions.shuffle(rng);
        let e3 = Ensemble::new(kk, solutions).unwrap();
        let shuffled = consensus(&e3, &cfg).unwrap();
        if shuffled.labels != base.labels {
            out.push(format!(
                "order: shuffling workers changed tau {:?} -> {:?}",
                base.labels.labels(),
                shuffled.labels.labels()
            ));
        }
    }
    out
}
