//! Minimum-cost bipartite assignment (Hungarian method with potentials).

use alloc::vec;
use alloc::vec::Vec;

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "cost matrix shape mismatch");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub unassigned_rows: Vec<usize>,
    pub unassigned_cols: Vec<usize>,
}

impl Assignment {
    pub fn total_cost(&self, costs: &CostMatrix) -> f64 {
        self.pairs.iter().map(|&(r, c)| costs.get(r, c)).sum()
    }
}

/// Solves the rectangular assignment problem: every row is assigned when
/// `rows <= cols`, every column otherwise. Returns for each row its column.
/// Costs must be finite.
pub fn solve(costs: &CostMatrix) -> Vec<Option<usize>> {
    let (n, m) = (costs.rows, costs.cols);
    if n == 0 || m == 0 {
        return vec![None; n];
    }
    if n > m {
        let t = CostMatrix::from_fn(m, n, |r, c| costs.get(c, r));
        let col_of_row = solve(&t);
        let mut out = vec![None; n];
        for (c, r) in col_of_row.into_iter().enumerate() {
            if let Some(r) = r {
                out[r] = Some(c);
            }
        }
        return out;
    }
    // 1-based potentials formulation, rows <= cols
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = costs.get(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = Some(j - 1);
        }
    }
    out
}

/// Gated minimum-cost assignment.
///
/// Entries above `gate` (or non-finite) are replaced by a cost larger than
/// any feasible assignment before solving, then dropped from the result.
pub fn associate_hungarian(costs: &CostMatrix, gate: f64) -> Assignment {
    let (n, m) = (costs.rows, costs.cols);
    let mut max_ok = 0.0f64;
    for &c in &costs.data {
        if c.is_finite() && c <= gate {
            max_ok = max_ok.max(c.abs());
        }
    }
    let big = (max_ok + 1.0) * (n.max(m) as f64 + 1.0) * 2.0;
    let gated = CostMatrix::from_fn(n, m, |r, c| {
        let x = costs.get(r, c);
        if x.is_finite() && x <= gate {
            x
        } else {
            big
        }
    });
    let col_of_row = solve(&gated);
    let mut row_used = vec![false; n];
    let mut col_used = vec![false; m];
    let mut pairs = Vec::new();
    for (r, c) in col_of_row.into_iter().enumerate() {
        if let Some(c) = c {
            let x = costs.get(r, c);
            if x.is_finite() && x <= gate {
                pairs.push((r, c));
                row_used[r] = true;
                col_used[c] = true;
            }
        }
    }
    Assignment {
        pairs,
        unassigned_rows: (0..n).filter(|&r| !row_used[r]).collect(),
        unassigned_cols: (0..m).filter(|&c| !col_used[c]).collect(),
    }
}
