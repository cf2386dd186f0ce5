//! Pair-counting partition comparison.
//!
//! Every index is computed from a [`PairCounts`] summary of the contingency
//! table. Binomial sums are kept in exact integer arithmetic and only the
//! final ratio is taken in floating point, so two routes to the same
//! rational value produce the same `f64`.
//!
//! Mirkin and Hubert indices are reported in their normalized pair-count
//! forms, `(b + c) / C(o,2)` and `(a + d - b - c) / C(o,2)`. These are the
//! forms under which published tables satisfy `MI = 1 - RI` and
//! `HI = 2 RI - 1`; the unnormalized Mirkin metric `2 (b + c)` is not used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

#[inline]
fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Cross-tabulation of two partitions over the same objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Count of objects labeled `i` in the first partition and `j` in the
    /// second (0-based indices, i.e. label minus one).
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.counts[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

/// Builds the `k1 x k2` contingency table of `u` against `v`.
pub fn contingency(u: &Partition, v: &Partition) -> Result<ContingencyTable> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (rows, cols) = (u.k(), v.k());
    let mut counts = vec![0u64; rows * cols];
    let mut row_sums = vec![0u64; rows];
    let mut col_sums = vec![0u64; cols];
    for (&a, &b) in u.labels().iter().zip(v.labels()) {
        let (i, j) = (a as usize - 1, b as usize - 1);
        counts[i * cols + j] += 1;
        row_sums[i] += 1;
        col_sums[j] += 1;
    }
    Ok(ContingencyTable {
        rows,
        cols,
        counts,
        row_sums,
        col_sums,
        total: u.len() as u64,
    })
}

/// Classification of all unordered object pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairCounts {
    /// Together in both partitions.
    pub a: u64,
    /// Together in the first only.
    pub b: u64,
    /// Together in the second only.
    pub c: u64,
    /// Apart in both.
    pub d: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

pub fn pair_counts(t: &ContingencyTable) -> PairCounts {
    let a: u64 = t.counts.iter().map(|&n| choose2(n)).sum();
    let rows: u64 = t.row_sums.iter().map(|&n| choose2(n)).sum();
    let cols: u64 = t.col_sums.iter().map(|&n| choose2(n)).sum();
    let b = rows - a;
    let c = cols - a;
    let d = choose2(t.total) - a - b - c;
    PairCounts { a, b, c, d }
}

fn checked_pairs(u: &Partition, v: &Partition) -> Result<PairCounts> {
    let t = contingency(u, v)?;
    if t.total < 2 {
        return Err(Error::UndefinedMetric {
            objects: t.total as usize,
        });
    }
    Ok(pair_counts(&t))
}

pub fn rand_index(u: &Partition, v: &Partition) -> Result<f64> {
    let p = checked_pairs(u, v)?;
    Ok((p.a + p.d) as f64 / p.total() as f64)
}

/// Normalized Mirkin index, the fraction of pairs the partitions disagree on.
pub fn mirkin_index(u: &Partition, v: &Partition) -> Result<f64> {
    let p = checked_pairs(u, v)?;
    Ok((p.b + p.c) as f64 / p.total() as f64)
}

/// Hubert's Gamma in pair-count form: agreements minus disagreements over
/// all pairs.
pub fn hubert_index(u: &Partition, v: &Partition) -> Result<f64> {
    let p = checked_pairs(u, v)?;
    let signed = (p.a + p.d) as i128 - (p.b + p.c) as i128;
    Ok(signed as f64 / p.total() as f64)
}

/// Hubert–Arabie adjusted Rand index.
///
/// When the chance-corrected denominator vanishes (both partitions a single
/// cluster, or both all singletons) the result is 1.0 for identical
/// groupings and 0.0 otherwise.
pub fn adjusted_rand_index(u: &Partition, v: &Partition) -> Result<f64> {
    let p = checked_pairs(u, v)?;
    Ok(ari_from_pairs(&p, || u.same_grouping(v)))
}

fn ari_from_pairs(p: &PairCounts, identical: impl FnOnce() -> bool) -> f64 {
    // (index - E) / (M - E) with E = sA*sB/C and M = (sA+sB)/2, scaled by 2C.
    let index = p.a as i128;
    let row_pairs = (p.a + p.b) as i128;
    let col_pairs = (p.a + p.c) as i128;
    let all = p.total() as i128;
    let numerator = 2 * (index * all - row_pairs * col_pairs);
    let denominator = (row_pairs + col_pairs) * all - 2 * row_pairs * col_pairs;
    if denominator == 0 {
        return if identical() { 1.0 } else { 0.0 };
    }
    numerator as f64 / denominator as f64
}

/// ARI, RI, MI and HI for one pair of partitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub ari: f64,
    pub rand: f64,
    pub mirkin: f64,
    pub hubert: f64,
}

pub fn compare(u: &Partition, v: &Partition) -> Result<MetricSet> {
    let p = checked_pairs(u, v)?;
    let all = p.total() as f64;
    Ok(MetricSet {
        ari: ari_from_pairs(&p, || u.same_grouping(v)),
        rand: (p.a + p.d) as f64 / all,
        mirkin: (p.b + p.c) as f64 / all,
        hubert: ((p.a + p.d) as i128 - (p.b + p.c) as i128) as f64 / all,
    })
}
