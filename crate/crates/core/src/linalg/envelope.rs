use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;


use super::LinalgError;
#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;

/// Symmetric sparse matrix as per-row `(column, value)` lists; both triangles
/// are stored.
#[derive(Debug, Clone)]
pub struct SparseSymmetric {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSymmetric {
    pub fn new(n: usize) -> Self {
        SparseSymmetric { n, rows: vec![Vec::new(); n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Adds `v` at `(i, j)` and `(j, i)` (once on the diagonal).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        Self::bump(&mut self.rows[i], j, v);
        if i != j {
            Self::bump(&mut self.rows[j], i, v);
        }
    }

    fn bump(row: &mut Vec<(usize, f64)>, j: usize, v: f64) {
        if let Some(slot) = row.iter_mut().find(|(c, _)| *c == j) {
            slot.1 += v;
        } else {
            row.push((j, v));
        }
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }
}

/// Reverse Cuthill-McKee ordering; returns `perm[new] = old`.
fn reverse_cuthill_mckee(a: &SparseSymmetric) -> Vec<usize> {
    let n = a.n;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| a.rows[i].iter().map(|&(j, _)| j).filter(|&j| j != i).collect())
        .collect();
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, mask: &[bool]| -> (Vec<usize>, usize) {
        // Last level of a BFS restricted to unvisited vertices, and its depth.
        let mut dist = vec![usize::MAX; n];
        let mut q = VecDeque::new();
        dist[start] = 0;
        q.push_back(start);
        let mut last = 0;
        while let Some(u) = q.pop_front() {
            last = last.max(dist[u]);
            for &w in &adj[u] {
                if !mask[w] && dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        let level = (0..n).filter(|&v| dist[v] == last).collect();
        (level, last)
    };

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // Pseudo-peripheral start vertex.
        let mut start = seed;
        let (mut level, mut ecc) = bfs_levels(start, &visited);
        for _ in 0..8 {
            let cand = *level.iter().min_by_key(|&&v| (deg[v], v)).unwrap();
            let (l2, e2) = bfs_levels(cand, &visited);
            if e2 <= ecc {
                break;
            }
            start = cand;
            level = l2;
            ecc = e2;
        }
        let mut q = VecDeque::new();
        visited[start] = true;
        q.push_back(start);
        while let Some(u) = q.pop_front() {
            order.push(u);
            let mut nb: Vec<usize> = adj[u].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (deg[w], w));
            nb.dedup();
            for w in nb {
                if !visited[w] {
                    visited[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Envelope (skyline) Cholesky factor of a sparse SPD matrix, computed in
/// reverse Cuthill-McKee order. Solves cost `O(n · bandwidth)`.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn new(a: &SparseSymmetric) -> Result<Self, LinalgError> {
        let n = a.n;
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0usize; n];
        for i in 0..n {
            let old = perm[i];
            let mut f = i;
            for &(j, _) in &a.rows[old] {
                f = f.min(inv[j]);
            }
            first[i] = f;
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut vals = vec![0.0; start[n]];
        for i in 0..n {
            for &(j, v) in &a.rows[perm[i]] {
                let jn = inv[j];
                if jn <= i {
                    vals[start[i] + jn - first[i]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let ri = start[i];
            for j in fi..i {
                let fj = first[j];
                let rj = start[j];
                let k0 = fi.max(fj);
                let mut s = vals[ri + j - fi];
                let a_i = &vals[ri + k0 - fi..ri + j - fi];
                let a_j = &vals[rj + k0 - fj..rj + j - fj];
                s -= a_i.iter().zip(a_j).map(|(x, y)| x * y).sum::<f64>();
                vals[ri + j - fi] = s / vals[rj + j - fj];
            }
            let row = &vals[ri..ri + i - fi];
            let d = vals[ri + i - fi] - row.iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) {
                return Err(LinalgError::NotPositiveDefinite(perm[i]));
            }
            vals[ri + i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky { n, perm, first, start, vals })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn envelope_size(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    fn diag(&self, i: usize) -> f64 {
        self.vals[self.start[i] + i - self.first[i]]
    }

    fn lower_in_place(&self, y: &mut [f64]) {
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i] + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / self.diag(i);
        }
    }

    fn upper_in_place(&self, y: &mut [f64]) {
        for i in (0..self.n).rev() {
            y[i] /= self.diag(i);
            let xi = y[i];
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i] + i - fi];
            for (yk, a) in y[fi..i].iter_mut().zip(row) {
                *yk -= a * xi;
            }
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        self.lower_in_place(&mut y);
        self.upper_in_place(&mut y);
        let mut x = vec![0.0; self.n];
        for (i, &o) in self.perm.iter().enumerate() {
            x[o] = y[i];
        }
        x
    }

    /// Returns `x` with `Lᵀ P x = z`, so that `x` has covariance `A⁻¹` when
    /// `z` is standard normal.
    pub fn solve_transpose_factor(&self, z: &[f64]) -> Vec<f64> {
        let mut y = z.to_vec();
        self.upper_in_place(&mut y);
        let mut x = vec![0.0; self.n];
        for (i, &o) in self.perm.iter().enumerate() {
            x[o] = y[i];
        }
        x
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.diag(i).ln()).sum::<f64>()
    }
}
