//! Green functions and transfer currents.
//!
//! Wired: `G = Δ⁻¹` on interior vertices, zero on `∂V`. Free: `G` is the
//! inverse of `Δ` on mean-zero functions, extended so that `G1 = 0`; it is
//! obtained by grounding one vertex and projecting, `G = P G_r P` with
//! `P = I − J/n`.
//!
//! Up to [`GreenOptions::dense_limit`] unknowns the full matrix is formed by a
//! dense Cholesky inverse; above it an envelope Cholesky factor is kept and
//! columns are produced by solves.

mod dual;
mod transfer;

pub use dual::{dual_transfer_check, DualCheck};
pub use transfer::{
    transfer_column, transfer_current, transfer_current_spectral, transfer_current_with, TransferColumns,
    TransferCurrent, TransferKernel,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{BoundaryCondition, GraphError, VertexId, WeightedGraph};
use crate::linalg::{Cholesky, EnvelopeCholesky, LinalgError, Matrix, SparseSymmetric};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GreenError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("wired boundary condition on a graph without boundary vertices")]
    NoBoundary,
    #[error("dense all-pairs transfer current requested for {edges} edges (limit {limit})")]
    TooLarge { edges: usize, limit: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct GreenOptions {
    /// Largest number of unknowns handled by the dense path.
    pub dense_limit: usize,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions { dense_limit: 4000 }
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Dense(Matrix),
    Sparse {
        factor: EnvelopeCholesky,
        /// `G_r 1` for the free case, used to recentre columns.
        ones: Vec<f64>,
    },
}

/// Green function of a weighted graph under a boundary condition.
#[derive(Debug, Clone)]
pub struct GreenOperator {
    bc: BoundaryCondition,
    n: usize,
    /// Vertices carrying unknowns in the factorisation.
    unknowns: Vec<VertexId>,
    slot: Vec<Option<usize>>,
    backend: Backend,
}

pub fn green(g: &WeightedGraph, bc: BoundaryCondition) -> Result<GreenOperator, GreenError> {
    green_with(g, bc, GreenOptions::default())
}

/// Laplacian restricted to `unknowns` (all other vertices held at zero).
pub(crate) fn reduced_laplacian(g: &WeightedGraph, slot: &[Option<usize>], k: usize) -> SparseSymmetric {
    let mut a = SparseSymmetric::new(k);
    for e in g.edges() {
        let (su, sv) = (slot[e.u], slot[e.v]);
        if let Some(i) = su {
            a.add(i, i, e.c);
        }
        if let Some(j) = sv {
            a.add(j, j, e.c);
        }
        if let (Some(i), Some(j)) = (su, sv) {
            a.add(i, j, -e.c);
        }
    }
    a
}

/// Vertices carrying unknowns: interior for wired, all but vertex 0 for free.
pub(crate) fn unknowns_for(g: &WeightedGraph, bc: BoundaryCondition) -> Result<Vec<VertexId>, GreenError> {
    match bc {
        BoundaryCondition::Wired => {
            if g.boundary().is_empty() {
                return Err(GreenError::NoBoundary);
            }
            Ok(g.interior())
        }
        BoundaryCondition::Free => Ok((1..g.vertex_count()).collect()),
    }
}

pub fn green_with(g: &WeightedGraph, bc: BoundaryCondition, opts: GreenOptions) -> Result<GreenOperator, GreenError> {
    let n = g.vertex_count();
    let unknowns = unknowns_for(g, bc)?;
    let mut slot = vec![None; n];
    for (i, &v) in unknowns.iter().enumerate() {
        slot[v] = Some(i);
    }
    let k = unknowns.len();
    let lap = reduced_laplacian(g, &slot, k);

    let backend = if k <= opts.dense_limit {
        let dense = Matrix::from_fn(k, k, |i, j| lap.row(i).iter().find(|(c, _)| *c == j).map_or(0.0, |x| x.1));
        let inv = if k == 0 { Matrix::zeros(0, 0) } else { Cholesky::new(&dense)?.inverse() };
        let mut full = Matrix::zeros(n, n);
        for (i, &x) in unknowns.iter().enumerate() {
            for (j, &y) in unknowns.iter().enumerate() {
                full[(x, y)] = inv[(i, j)];
            }
        }
        if bc == BoundaryCondition::Free {
            project_mean_zero(&mut full);
        }
        Backend::Dense(full)
    } else {
        let factor = EnvelopeCholesky::new(&lap)?;
        let ones = if bc == BoundaryCondition::Free {
            let x = factor.solve(&vec![1.0; k]);
            let mut full = vec![0.0; n];
            for (i, &v) in unknowns.iter().enumerate() {
                full[v] = x[i];
            }
            full
        } else {
            Vec::new()
        };
        Backend::Sparse { factor, ones }
    };
    Ok(GreenOperator { bc, n, unknowns, slot, backend })
}

/// `M ← P M P` with `P = I − J/n`.
fn project_mean_zero(m: &mut Matrix) {
    let n = m.rows();
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| m.row(i).iter().sum::<f64>() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| (0..n).map(|i| m[(i, j)]).sum::<f64>() / nf).collect();
    let total = row_means.iter().sum::<f64>() / nf;
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] += total - row_means[i] - col_means[j];
        }
    }
}

fn center(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

impl GreenOperator {
    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.backend, Backend::Dense(_))
    }

    /// The full matrix when the dense path was taken.
    pub fn matrix(&self) -> Option<&Matrix> {
        match &self.backend {
            Backend::Dense(m) => Some(m),
            Backend::Sparse { .. } => None,
        }
    }

    /// `G f` for a function given on all vertices. For wired conditions the
    /// values of `f` on `∂V` are ignored.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n);
        match &self.backend {
            Backend::Dense(m) => m.mul_vec(f),
            Backend::Sparse { factor, .. } => {
                let mut rhs: Vec<f64> = self.unknowns.iter().map(|&v| f[v]).collect();
                if self.bc == BoundaryCondition::Free {
                    let mean = f.iter().sum::<f64>() / self.n as f64;
                    rhs.iter_mut().for_each(|x| *x -= mean);
                }
                let x = factor.solve(&rhs);
                let mut out = vec![0.0; self.n];
                for (i, &v) in self.unknowns.iter().enumerate() {
                    out[v] = x[i];
                }
                if self.bc == BoundaryCondition::Free {
                    center(&mut out);
                }
                out
            }
        }
    }

    /// `G(·, y)`.
    pub fn column(&self, y: VertexId) -> Vec<f64> {
        match &self.backend {
            Backend::Dense(m) => (0..self.n).map(|i| m[(i, y)]).collect(),
            Backend::Sparse { factor, ones } => match self.bc {
                BoundaryCondition::Wired => {
                    let mut out = vec![0.0; self.n];
                    if let Some(s) = self.slot[y] {
                        let mut rhs = vec![0.0; self.unknowns.len()];
                        rhs[s] = 1.0;
                        let x = factor.solve(&rhs);
                        for (i, &v) in self.unknowns.iter().enumerate() {
                            out[v] = x[i];
                        }
                    }
                    out
                }
                BoundaryCondition::Free => {
                    let mut out = vec![0.0; self.n];
                    if let Some(s) = self.slot[y] {
                        let mut rhs = vec![0.0; self.unknowns.len()];
                        rhs[s] = 1.0;
                        let x = factor.solve(&rhs);
                        for (i, &v) in self.unknowns.iter().enumerate() {
                            out[v] = x[i];
                        }
                    }
                    let nf = self.n as f64;
                    for (o, h) in out.iter_mut().zip(ones) {
                        *o -= h / nf;
                    }
                    center(&mut out);
                    out
                }
            },
        }
    }

    pub fn value(&self, x: VertexId, y: VertexId) -> f64 {
        match &self.backend {
            Backend::Dense(m) => m[(x, y)],
            Backend::Sparse { .. } => self.column(y)[x],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian, tests::triangle, Edge, Vertex, VertexFunction};

    fn path_wired() -> WeightedGraph {
        let v = |x: f64, b| Vertex { pos: vec![x, 0.0], boundary: b };
        WeightedGraph::new(
            2,
            vec![v(0.0, true), v(1.0, false), v(2.0, true)],
            vec![Edge { u: 0, v: 1, c: 1.0 }, Edge { u: 1, v: 2, c: 1.0 }],
        )
        .unwrap()
    }

    #[test]
    fn path_green_value() {
        let g = path_wired();
        let gr = green(&g, BoundaryCondition::Wired).unwrap();
        assert!((gr.value(1, 1) - 0.5).abs() < 1e-15);
        assert_eq!(gr.value(0, 1), 0.0);
    }

    #[test]
    fn free_green_is_mean_zero_inverse() {
        let g = triangle([1.0, 2.0, 0.5]);
        let gr = green(&g, BoundaryCondition::Free).unwrap();
        for y in 0..3 {
            let col = gr.column(y);
            assert!(col.iter().sum::<f64>().abs() < 1e-14);
            let l = laplacian(&g, &VertexFunction(col));
            for x in 0..3 {
                let target = if x == y { 1.0 - 1.0 / 3.0 } else { -1.0 / 3.0 };
                assert!((l.0[x] - target).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        let g = triangle([1.0, 2.0, 0.5]);
        for bc in [BoundaryCondition::Free] {
            let d = green(&g, bc).unwrap();
            let s = green_with(&g, bc, GreenOptions { dense_limit: 0 }).unwrap();
            assert!(!s.is_dense());
            for y in 0..3 {
                let (a, b) = (d.column(y), s.column(y));
                for i in 0..3 {
                    assert!((a[i] - b[i]).abs() < 1e-13);
                }
            }
        }
        let g = path_wired();
        let d = green(&g, BoundaryCondition::Wired).unwrap();
        let s = green_with(&g, BoundaryCondition::Wired, GreenOptions { dense_limit: 0 }).unwrap();
        assert!((d.value(1, 1) - s.value(1, 1)).abs() < 1e-15);
        let f = [0.3, 1.0, -2.0];
        assert!((d.apply(&f)[1] - s.apply(&f)[1]).abs() < 1e-15);
    }

    #[test]
    fn wired_needs_boundary() {
        let g = triangle([1.0; 3]);
        assert_eq!(green(&g, BoundaryCondition::Wired).unwrap_err(), GreenError::NoBoundary);
    }
}
