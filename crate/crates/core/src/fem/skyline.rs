//! Symmetric skyline (variable band) storage with an in-place `L D L^T`
//! factorisation. The profile is fixed once from the connectivity so the
//! matrix can be refilled and refactored every design iteration.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Pivots below this fraction of the original diagonal count as zero-energy modes.
const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SkylineMatrix {
    n: usize,
    /// First stored row of each column.
    first: Vec<usize>,
    /// Start of each column in `values`; column `j` holds rows `first[j]..=j`.
    start: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineMatrix {
    /// Empty matrix with the profile implied by `first` (`first[j] <= j`).
    pub fn with_profile(first: Vec<usize>) -> Self {
        let n = first.len();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for (j, &f) in first.iter().enumerate() {
            debug_assert!(f <= j);
            start.push(start[j] + j + 1 - f);
        }
        let values = vec![0.0; start[n]];
        Self {
            n,
            first,
            start,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored entries.
    pub fn profile_size(&self) -> usize {
        self.values.len()
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    fn index(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        (r >= self.first[c]).then(|| self.start[c] + r - self.first[c])
    }

    /// Entry `(i, j)`; zero outside the profile.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.index(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to the symmetric pair `(i, j)`, `(j, i)`. Entries outside the
    /// profile are a programming error.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .index(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside the skyline profile"));
        self.values[k] += v;
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let f = self.first[j];
            let col = &self.values[self.start[j]..self.start[j + 1]];
            let (upper, diag) = col.split_at(col.len() - 1);
            y[j] += diag[0] * x[j];
            let mut dot = 0.0;
            for (k, &a) in upper.iter().enumerate() {
                y[f + k] += a * x[j];
                dot += a * x[f + k];
            }
            y[j] += dot;
        }
        y
    }

    /// Factorises into `L D L^T`. Every column whose pivot falls below
    /// `PIVOT_TOL` times its original diagonal is a zero-energy mode; if any
    /// exist the matrix is reported singular with their count.
    pub fn factorize(mut self) -> Result<SkylineFactor> {
        let n = self.n;
        let mut null_modes = 0;
        for j in 0..n {
            let fj = self.first[j];
            let sj = self.start[j];
            let original_diag = self.values[sj + j - fj];
            // Reduce the off-diagonal part of column j: g_ij = a_ij - sum_k l_ki g_kj.
            for i in (fj + 1)..j {
                let fi = self.first[i];
                let lo = fi.max(fj);
                if lo < i {
                    let si = self.start[i];
                    let (before, col_j) = self.values.split_at_mut(sj);
                    let li = &before[si + lo - fi..si + i - fi];
                    let gj = &col_j[lo - fj..i - fj];
                    let dot: f64 = li.iter().zip(gj).map(|(a, b)| a * b).sum();
                    col_j[i - fj] -= dot;
                }
            }
            // Scale by the pivots and update the diagonal.
            let mut diag = original_diag;
            for i in fj..j {
                let di = self.values[self.start[i] + i - self.first[i]];
                let g = self.values[sj + i - fj];
                let l = g / di;
                diag -= l * g;
                self.values[sj + i - fj] = l;
            }
            if !(diag > PIVOT_TOL * original_diag.abs()) || original_diag <= 0.0 {
                null_modes += 1;
                // Keep going so the full count is reported.
                diag = if original_diag > 0.0 {
                    original_diag
                } else {
                    1.0
                };
            }
            self.values[sj + j - fj] = diag;
        }
        if null_modes > 0 {
            return Err(Error::SingularSystem { null_modes });
        }
        Ok(SkylineFactor { ldl: self })
    }
}

/// `L D L^T` factor stored in the skyline layout: unit `L` below the diagonal
/// (kept column-wise as `L^T`) and `D` on the diagonal.
#[derive(Debug, Clone)]
pub struct SkylineFactor {
    ldl: SkylineMatrix,
}

impl SkylineFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = &self.ldl;
        let mut x = b.to_vec();
        // L y = b (column j of storage holds row j of L).
        for j in 0..m.n {
            let f = m.first[j];
            let col = &m.values[m.start[j]..m.start[j + 1] - 1];
            let dot: f64 = col.iter().zip(&x[f..j]).map(|(l, y)| l * y).sum();
            x[j] -= dot;
        }
        for (j, xj) in x.iter_mut().enumerate().take(m.n) {
            *xj /= m.values[m.start[j + 1] - 1];
        }
        // L^T x = z.
        for j in (0..m.n).rev() {
            let f = m.first[j];
            let xj = x[j];
            let col = &m.values[m.start[j]..m.start[j + 1] - 1];
            for (k, l) in col.iter().enumerate() {
                x[f + k] -= l * xj;
            }
        }
        x
    }
}

/// Reverse Cuthill-McKee ordering of a graph given by adjacency lists.
/// Returns `order` with `order[k]` the vertex placed at position `k`. Each
/// connected component starts from a pseudo-peripheral vertex.
pub fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let degree = |v: usize| adjacency[v].len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for seed in 0..n {
        if placed[seed] {
            continue;
        }
        let root = pseudo_peripheral(adjacency, seed);
        let mut queue = VecDeque::from([root]);
        placed[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v]
                .iter()
                .copied()
                .filter(|&w| !placed[w])
                .collect();
            next.sort_by_key(|&w| (degree(w), w));
            for w in next {
                placed[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Breadth-first levels from `root`: (eccentricity, last level).
fn level_structure(adjacency: &[Vec<usize>], root: usize) -> (usize, Vec<usize>) {
    let mut depth = vec![usize::MAX; adjacency.len()];
    depth[root] = 0;
    let mut frontier = vec![root];
    let mut height = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in &adjacency[v] {
                if depth[w] == usize::MAX {
                    depth[w] = height + 1;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return (height, frontier);
        }
        height += 1;
        frontier = next;
    }
}

fn pseudo_peripheral(adjacency: &[Vec<usize>], seed: usize) -> usize {
    let mut root = seed;
    let (mut height, mut last) = level_structure(adjacency, root);
    loop {
        let candidate = *last
            .iter()
            .min_by_key(|&&v| (adjacency[v].len(), v))
            .expect("level sets are never empty");
        let (h, l) = level_structure(adjacency, candidate);
        if h <= height {
            return root;
        }
        root = candidate;
        height = h;
        last = l;
    }
}
