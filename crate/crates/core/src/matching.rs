//! Maximum-weight perfect matching on small square integer matrices.

/// Shortest augmenting path Hungarian method with row/column potentials,
/// O(n³). Returns `assignment[row] = col` and the total weight.
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> (Vec<usize>, i64) {
    let n = weights.len();
    if n == 0 {
        return (Vec::new(), 0);
    }
    debug_assert!(weights.iter().all(|r| r.len() == n));

    // Minimize negated weights. Index 0 is a sentinel; rows/cols are 1-based.
    let cost = |i: usize, j: usize| -weights[i - 1][j - 1];
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[matched_row[j] - 1] = j - 1;
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| weights[i][j])
        .sum();
    (assignment, total)
}

/// Among all maximum-weight assignments, returns the one whose sequence
/// `assignment[order[0]], assignment[order[1]], ...` is lexicographically
/// smallest. `order` must be a permutation of the row indices.
pub fn lex_first_optimal_assignment(weights: &[Vec<i64>], order: &[usize]) -> (Vec<usize>, i64) {
    let n = weights.len();
    debug_assert_eq!(order.len(), n);
    let (_, best) = max_weight_assignment(weights);

    let mut assignment = vec![usize::MAX; n];
    let mut col_taken = vec![false; n];
    let mut fixed_weight = 0i64;

    for (step, &row) in order.iter().enumerate() {
        let rest_rows = &order[step + 1..];
        // Once only zero rows remain, any completion is optimal.
        let zero_tail = order[step..]
            .iter()
            .all(|&r| weights[r].iter().all(|&w| w == 0));
        for col in 0..n {
            if col_taken[col] {
                continue;
            }
            let accept = zero_tail || {
                let rest_cols: Vec<usize> =
                    (0..n).filter(|&c| !col_taken[c] && c != col).collect();
                let sub: Vec<Vec<i64>> = rest_rows
                    .iter()
                    .map(|&r| rest_cols.iter().map(|&c| weights[r][c]).collect())
                    .collect();
                let (_, rest_best) = max_weight_assignment(&sub);
                fixed_weight + weights[row][col] + rest_best == best
            };
            if accept {
                assignment[row] = col;
                col_taken[col] = true;
                fixed_weight += weights[row][col];
                break;
            }
        }
    }
    (assignment, best)
}
