//! Detection-to-track association: IoU cost matrices, an optimal
//! (Hungarian) solver, a greedy solver and IoU gating.

use std::fmt;
use std::str::FromStr;

use crate::geometry::{BBox, Detection};

/// Dense row-major cost matrix. Rows are tracks, columns detections.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    /// Panics if `values.len() != rows * cols` or an entry is not finite.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols, "cost matrix shape mismatch");
        assert!(values.iter().all(|v| v.is_finite()), "cost entries must be finite");
        CostMatrix { rows, cols, values }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let values = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged cost matrix");
                r.iter().copied()
            })
            .collect();
        CostMatrix::new(rows.len(), cols, values)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        CostMatrix::new(rows, cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn total(&self, pairs: &[(usize, usize)]) -> f64 {
        pairs.iter().map(|&(i, j)| self.get(i, j)).sum()
    }
}

/// Entry `(i, j)` is `1 - IoU(predicted[i], dets[j])`.
pub fn build_cost(predicted: &[BBox], dets: &[Detection]) -> CostMatrix {
    CostMatrix::from_fn(predicted.len(), dets.len(), |i, j| {
        1.0 - predicted[i].iou(&dets[j].bbox)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    /// `(track index, detection index)`, sorted by track index.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_dets: Vec<usize>,
}

impl Assignment {
    fn from_pairs(mut pairs: Vec<(usize, usize)>, rows: usize, cols: usize) -> Self {
        pairs.sort_unstable();
        let mut row_used = vec![false; rows];
        let mut col_used = vec![false; cols];
        for &(i, j) in &pairs {
            row_used[i] = true;
            col_used[j] = true;
        }
        Assignment {
            pairs,
            unmatched_tracks: (0..rows).filter(|&i| !row_used[i]).collect(),
            unmatched_dets: (0..cols).filter(|&j| !col_used[j]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AssocMethod {
    #[default]
    Hungarian,
    Greedy,
}

impl AssocMethod {
    pub fn solve(self, c: &CostMatrix) -> Assignment {
        match self {
            AssocMethod::Hungarian => solve_hungarian(c),
            AssocMethod::Greedy => solve_greedy(c),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AssocMethod::Hungarian => "hungarian",
            AssocMethod::Greedy => "greedy",
        }
    }
}

impl fmt::Display for AssocMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AssocMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hungarian" => Ok(AssocMethod::Hungarian),
            "greedy" => Ok(AssocMethod::Greedy),
            other => Err(format!("unknown association method `{other}`")),
        }
    }
}

/// Minimum-cost matching of size `min(rows, cols)`.
///
/// Among optimal matchings the lexicographically smallest pair list is
/// returned, so equal-cost alternatives resolve the same way on every run.
pub fn solve_hungarian(c: &CostMatrix) -> Assignment {
    let (rows, cols) = (c.rows, c.cols);
    if rows == 0 || cols == 0 {
        return Assignment::from_pairs(Vec::new(), rows, cols);
    }
    let n = rows.max(cols);
    // Every perfect matching of the padded square uses the same number of
    // padding cells, so their value does not affect which pairs are optimal.
    let pad = c.values.iter().copied().fold(0.0_f64, f64::max);
    let cost = |i: usize, j: usize| if i < rows && j < cols { c.get(i, j) } else { pad };

    let solution = shortest_augmenting_path(n, &cost);
    let col_of = lexicographic_optimum(n, &cost, solution);

    let pairs = (0..rows)
        .filter_map(|i| (col_of[i] < cols).then_some((i, col_of[i])))
        .collect();
    Assignment::from_pairs(pairs, rows, cols)
}

struct Dual {
    /// Column assigned to each row.
    col_of: Vec<usize>,
    u: Vec<f64>,
    v: Vec<f64>,
}

/// O(n^3) Hungarian method with row/column potentials on an n x n matrix.
fn shortest_augmenting_path(n: usize, cost: &impl Fn(usize, usize) -> f64) -> Dual {
    // 1-based internally; index 0 is the virtual root column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    Dual {
        col_of,
        u: u[1..].to_vec(),
        v: v[1..].to_vec(),
    }
}

/// Rewrites an optimal matching into the lexicographically smallest one.
///
/// Optimal matchings are exactly the perfect matchings on tight edges
/// (zero reduced cost under the optimal dual). Rows are fixed in order, each
/// to the smallest tight column reachable by an alternating cycle through
/// rows not yet fixed.
fn lexicographic_optimum(n: usize, cost: &impl Fn(usize, usize) -> f64, dual: Dual) -> Vec<usize> {
    let Dual { mut col_of, u, v } = dual;
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| cost(i, j).abs())
        .fold(1.0_f64, f64::max);
    let tol = 1e-12 * scale * n as f64;
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| cost(i, j) - u[i] - v[j] <= tol).collect())
        .collect();
    let original = col_of.clone();

    let mut row_of = vec![0; n];
    for (i, &j) in col_of.iter().enumerate() {
        row_of[j] = i;
    }
    let mut fixed = vec![false; n];
    for i in 0..n {
        for j in 0..n {
            if !tight[i][j] || fixed[row_of[j]] {
                continue;
            }
            if col_of[i] == j {
                break;
            }
            let freed = col_of[i];
            let mut visited = vec![false; n];
            let mut path = Vec::new();
            if reroute(row_of[j], freed, i, &tight, &fixed, &row_of, &mut visited, &mut path) {
                // path holds (row, new column) moves for the displaced rows
                for &(r, c) in &path {
                    col_of[r] = c;
                    row_of[c] = r;
                }
                col_of[i] = j;
                row_of[j] = i;
                break;
            }
        }
        fixed[i] = true;
    }

    let total = |m: &[usize]| m.iter().enumerate().map(|(i, &j)| cost(i, j)).sum::<f64>();
    if total(&col_of) <= total(&original) + tol {
        col_of
    } else {
        original
    }
}

#[allow(clippy::too_many_arguments)]
fn reroute(
    row: usize,
    target: usize,
    origin: usize,
    tight: &[Vec<bool>],
    fixed: &[bool],
    row_of: &[usize],
    visited: &mut [bool],
    path: &mut Vec<(usize, usize)>,
) -> bool {
    for c in 0..tight.len() {
        if !tight[row][c] || visited[c] {
            continue;
        }
        visited[c] = true;
        if c == target {
            path.push((row, c));
            return true;
        }
        let next = row_of[c];
        if next == origin || fixed[next] {
            continue;
        }
        if reroute(next, target, origin, tight, fixed, row_of, visited, path) {
            path.push((row, c));
            return true;
        }
    }
    false
}

/// Repeatedly fixes the globally cheapest remaining entry (ties by row, then
/// column) and removes its row and column.
pub fn solve_greedy(c: &CostMatrix) -> Assignment {
    let mut entries: Vec<(usize, usize)> = (0..c.rows)
        .flat_map(|i| (0..c.cols).map(move |j| (i, j)))
        .collect();
    entries.sort_by(|&(ai, aj), &(bi, bj)| {
        c.get(ai, aj)
            .total_cmp(&c.get(bi, bj))
            .then((ai, aj).cmp(&(bi, bj)))
    });
    let mut row_used = vec![false; c.rows];
    let mut col_used = vec![false; c.cols];
    let mut pairs = Vec::new();
    for (i, j) in entries {
        if !row_used[i] && !col_used[j] {
            row_used[i] = true;
            col_used[j] = true;
            pairs.push((i, j));
        }
    }
    Assignment::from_pairs(pairs, c.rows, c.cols)
}

/// Demotes pairs whose IoU (`1 - cost`) is below `t_cost` to unmatched.
pub fn gate(a: &Assignment, c: &CostMatrix, t_cost: f64) -> Assignment {
    let mut out = Assignment {
        pairs: Vec::with_capacity(a.pairs.len()),
        unmatched_tracks: a.unmatched_tracks.clone(),
        unmatched_dets: a.unmatched_dets.clone(),
    };
    for &(i, j) in &a.pairs {
        if 1.0 - c.get(i, j) < t_cost {
            out.unmatched_tracks.push(i);
            out.unmatched_dets.push(j);
        } else {
            out.pairs.push((i, j));
        }
    }
    out.unmatched_tracks.sort_unstable();
    out.unmatched_dets.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive oracle: best total over all injective maps of the smaller
    /// side into the larger one, and the lexicographically smallest pair list
    /// attaining it.
    fn brute_force(c: &CostMatrix) -> (f64, Vec<(usize, usize)>) {
        fn rec(
            c: &CostMatrix,
            row: usize,
            used: &mut Vec<bool>,
            acc: &mut Vec<(usize, usize)>,
            left: usize,
            best: &mut Option<(f64, Vec<(usize, usize)>)>,
        ) {
            if left == 0 || row == c.rows() {
                if left == 0 {
                    let total = c.total(acc);
                    let better = match best {
                        None => true,
                        Some((b, p)) => total < *b || (total == *b && acc < p),
                    };
                    if better {
                        *best = Some((total, acc.clone()));
                    }
                }
                return;
            }
            for j in 0..c.cols() {
                if !used[j] {
                    used[j] = true;
                    acc.push((row, j));
                    rec(c, row + 1, used, acc, left - 1, best);
                    acc.pop();
                    used[j] = false;
                }
            }
            if c.rows() - row > left {
                rec(c, row + 1, used, acc, left, best);
            }
        }
        let mut best = None;
        let k = c.rows().min(c.cols());
        rec(c, 0, &mut vec![false; c.cols()], &mut Vec::new(), k, &mut best);
        best.unwrap_or((0.0, Vec::new()))
    }

    fn check_partition(a: &Assignment, rows: usize, cols: usize) {
        let mut r: Vec<usize> = a.pairs.iter().map(|p| p.0).chain(a.unmatched_tracks.iter().copied()).collect();
        let mut c: Vec<usize> = a.pairs.iter().map(|p| p.1).chain(a.unmatched_dets.iter().copied()).collect();
        r.sort_unstable();
        c.sort_unstable();
        assert_eq!(r, (0..rows).collect::<Vec<_>>());
        assert_eq!(c, (0..cols).collect::<Vec<_>>());
    }

    #[test]
    fn build_cost_examples() {
        let b = |x, y, w, h| BBox::new(x, y, w, h).unwrap();
        let d = |bx| Detection::new(bx, 1.0).unwrap();
        let c = build_cost(
            &[b(0., 0., 2., 2.), b(10., 10., 1., 1.)],
            &[d(b(0., 0., 2., 2.)), d(b(1., 1., 2., 2.))],
        );
        assert_eq!(c.get(0, 0), 0.0);
        assert_eq!(c.get(1, 0), 1.0);
        assert!((c.get(0, 1) - 6.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn hungarian_examples() {
        let diag = CostMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 });
        let a = solve_hungarian(&diag);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1), (2, 2)]);

        let c = CostMatrix::from_rows(&[vec![1., 2.], vec![2., 4.]]);
        let a = solve_hungarian(&c);
        assert_eq!(a.pairs, vec![(0, 1), (1, 0)]);
        assert_eq!(c.total(&a.pairs), 4.0);
    }

    #[test]
    fn greedy_examples() {
        let c = CostMatrix::from_rows(&[vec![1., 2.], vec![2., 4.]]);
        let a = solve_greedy(&c);
        assert_eq!(a.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(c.total(&a.pairs), 5.0);

        let diag = CostMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 });
        assert_eq!(solve_greedy(&diag).pairs, solve_hungarian(&diag).pairs);

        let one = CostMatrix::from_rows(&[vec![0.3]]);
        assert_eq!(solve_greedy(&one).pairs, vec![(0, 0)]);
    }

    #[test]
    fn empty_and_rectangular() {
        let a = solve_hungarian(&CostMatrix::new(0, 3, vec![]));
        assert_eq!(a.unmatched_dets, vec![0, 1, 2]);
        let a = solve_hungarian(&CostMatrix::new(2, 0, vec![]));
        assert_eq!(a.unmatched_tracks, vec![0, 1]);

        let wide = CostMatrix::from_rows(&[vec![5., 1., 3.]]);
        let a = solve_hungarian(&wide);
        assert_eq!(a.pairs, vec![(0, 1)]);
        assert_eq!(a.unmatched_dets, vec![0, 2]);

        let tall = CostMatrix::from_rows(&[vec![5.], vec![1.], vec![3.]]);
        let a = solve_hungarian(&tall);
        assert_eq!(a.pairs, vec![(1, 0)]);
        assert_eq!(a.unmatched_tracks, vec![0, 2]);
    }

    #[test]
    fn ties_resolve_lexicographically() {
        let flat = CostMatrix::from_fn(3, 3, |_, _| 1.0);
        assert_eq!(solve_hungarian(&flat).pairs, vec![(0, 0), (1, 1), (2, 2)]);
        let anti = CostMatrix::from_rows(&[vec![0., 0.], vec![0., 1.]]);
        assert_eq!(solve_hungarian(&anti).pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..300 {
            let rows = rng.random_range(1..=5);
            let cols = rng.random_range(1..=5);
            let integer = trial % 2 == 0;
            let c = CostMatrix::from_fn(rows, cols, |_, _| {
                if integer {
                    rng.random_range(0..4) as f64
                } else {
                    rng.random::<f64>()
                }
            });
            let a = solve_hungarian(&c);
            check_partition(&a, rows, cols);
            let (best, lex) = brute_force(&c);
            assert!((c.total(&a.pairs) - best).abs() <= 1e-9, "trial {trial}");
            if integer {
                assert_eq!(a.pairs, lex, "trial {trial}");
            }
        }
    }

    #[test]
    fn hungarian_never_worse_than_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let rows = rng.random_range(1..=7);
            let cols = rng.random_range(1..=7);
            let c = CostMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>());
            let h = solve_hungarian(&c);
            let g = solve_greedy(&c);
            check_partition(&g, rows, cols);
            assert_eq!(h.pairs.len(), g.pairs.len());
            assert!(c.total(&h.pairs) <= c.total(&g.pairs) + 1e-12);
        }
    }

    #[test]
    fn constant_shift_keeps_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let rows = rng.random_range(1..=6);
            let cols = rng.random_range(1..=6);
            let base: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(0..10) as f64).collect();
            let c = CostMatrix::new(rows, cols, base.clone());
            let shifted = CostMatrix::new(rows, cols, base.iter().map(|v| v + 3.0).collect());
            assert_eq!(solve_hungarian(&c).pairs, solve_hungarian(&shifted).pairs);
        }
    }

    #[test]
    fn gate_examples() {
        let c = CostMatrix::from_rows(&[vec![0.5, 1.0], vec![1.0, 1.0]]);
        let a = Assignment::from_pairs(vec![(0, 0), (1, 1)], 2, 2);
        let g = gate(&a, &c, 0.01);
        assert_eq!(g.pairs, vec![(0, 0)]);
        assert_eq!(g.unmatched_tracks, vec![1]);
        assert_eq!(g.unmatched_dets, vec![1]);
        assert_eq!(gate(&g, &c, 0.01), g);
    }

    #[test]
    fn gate_is_monotone_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..=6);
            let c = CostMatrix::from_fn(n, n, |_, _| rng.random::<f64>());
            let a = solve_hungarian(&c);
            let mut prev = usize::MAX;
            for t in [0.01, 0.05, 0.1, 0.2] {
                let g = gate(&a, &c, t);
                assert!(g.pairs.len() <= prev);
                prev = g.pairs.len();
                assert_eq!(gate(&g, &c, t), g);
                check_partition(&g, n, n);
            }
        }
    }
}
