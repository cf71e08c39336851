use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;


use super::{green, unknowns_for, GreenError, GreenOperator};
use crate::graph::{BoundaryCondition, EdgeId, WeightedGraph};
use crate::linalg::{symmetric_eigen, Matrix};
#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;

/// Anything that can evaluate the transfer current
/// `T(xy, uv) = c(uv) (G(x,u) − G(y,u) − G(x,v) + G(y,v))`: `c(uv)` times the
/// potential drop from `x` to `y` when a unit current enters at `u` and
/// leaves at `v`.
pub trait TransferKernel {
    fn t(&self, e: EdgeId, f: EdgeId) -> f64;
    fn conductance(&self, e: EdgeId) -> f64;

    /// Symmetric version `K(e, f) = √(c(e)/c(f)) T(e, f)`.
    fn k(&self, e: EdgeId, f: EdgeId) -> f64 {
        (self.conductance(e) / self.conductance(f)).sqrt() * self.t(e, f)
    }

    /// `K` restricted to `edges`, symmetrised.
    fn k_matrix(&self, edges: &[EdgeId]) -> Matrix {
        let n = edges.len();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.t(edges[i], edges[i]);
            for j in 0..i {
                let v = 0.5 * (self.k(edges[i], edges[j]) + self.k(edges[j], edges[i]));
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// `T` restricted to `edges`.
    fn t_matrix(&self, edges: &[EdgeId]) -> Matrix {
        Matrix::from_fn(edges.len(), edges.len(), |i, j| self.t(edges[i], edges[j]))
    }
}

/// `T(·, f)` as a vector over all edges, from one Green solve.
pub fn transfer_column(g: &WeightedGraph, gr: &GreenOperator, f: EdgeId) -> Vec<f64> {
    let ed = g.edge(f);
    let w = match gr.matrix() {
        Some(m) => (0..g.vertex_count()).map(|i| m[(i, ed.u)] - m[(i, ed.v)]).collect::<Vec<_>>(),
        None => {
            let mut rhs = vec![0.0; g.vertex_count()];
            rhs[ed.u] += 1.0;
            rhs[ed.v] -= 1.0;
            if gr.boundary_condition() == BoundaryCondition::Wired {
                if g.is_boundary(ed.u) {
                    rhs[ed.u] = 0.0;
                }
                if g.is_boundary(ed.v) {
                    rhs[ed.v] = 0.0;
                }
            }
            gr.apply(&rhs)
        }
    };
    g.edges().iter().map(|e| ed.c * (w[e.u] - w[e.v])).collect()
}

/// Dense all-pairs transfer current.
#[derive(Debug, Clone)]
pub struct TransferCurrent {
    bc: BoundaryCondition,
    c: Vec<f64>,
    t: Matrix,
}

const DENSE_EDGE_LIMIT: usize = 6000;

pub fn transfer_current(g: &WeightedGraph, bc: BoundaryCondition) -> Result<TransferCurrent, GreenError> {
    let gr = green(g, bc)?;
    transfer_current_with(g, &gr)
}

pub fn transfer_current_with(g: &WeightedGraph, gr: &GreenOperator) -> Result<TransferCurrent, GreenError> {
    let m = g.edge_count();
    if m > DENSE_EDGE_LIMIT {
        return Err(GreenError::TooLarge { edges: m, limit: DENSE_EDGE_LIMIT });
    }
    let mut t = Matrix::zeros(m, m);
    match gr.matrix() {
        Some(gm) => {
            for (fi, f) in g.edges().iter().enumerate() {
                for (ei, e) in g.edges().iter().enumerate() {
                    t[(ei, fi)] = f.c * (gm[(e.u, f.u)] - gm[(e.v, f.u)] - gm[(e.u, f.v)] + gm[(e.v, f.v)]);
                }
            }
        }
        None => {
            for f in 0..m {
                let col = transfer_column(g, gr, f);
                for e in 0..m {
                    t[(e, f)] = col[e];
                }
            }
        }
    }
    Ok(TransferCurrent { bc: gr.boundary_condition(), c: g.edges().iter().map(|e| e.c).collect(), t })
}

/// Spectral route: `T(ab, uv) = c(uv) Σ_{λ≠0} (φ(a) − φ(b))(φ(u) − φ(v)) / λ`
/// over an orthonormal eigenbasis of the Laplacian on the unknowns.
/// Independent of the Cholesky route; meant for cross-checks on small graphs.
pub fn transfer_current_spectral(g: &WeightedGraph, bc: BoundaryCondition) -> Result<TransferCurrent, GreenError> {
    let n = g.vertex_count();
    let vars: Vec<usize> = match bc {
        BoundaryCondition::Wired => unknowns_for(g, bc)?,
        BoundaryCondition::Free => (0..n).collect(),
    };
    let mut slot = vec![None; n];
    for (i, &v) in vars.iter().enumerate() {
        slot[v] = Some(i);
    }
    let k = vars.len();
    let mut lap = Matrix::zeros(k, k);
    for e in g.edges() {
        if let Some(i) = slot[e.u] {
            lap[(i, i)] += e.c;
        }
        if let Some(j) = slot[e.v] {
            lap[(j, j)] += e.c;
        }
        if let (Some(i), Some(j)) = (slot[e.u], slot[e.v]) {
            lap[(i, j)] -= e.c;
            lap[(j, i)] -= e.c;
        }
    }
    let eig = symmetric_eigen(&lap);
    let scale = eig.values.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    let modes: Vec<usize> = (0..k).filter(|&i| eig.values[i] > 1e-10 * scale).collect();
    let m = g.edge_count();
    let phi = |v: usize, mode: usize| slot[v].map_or(0.0, |i| eig.vectors[(i, mode)]);
    // grad[e][j] = φ_j(u) − φ_j(v) for edge e = uv, scaled by λ_j^{-1/2}
    let grad = Matrix::from_fn(m, modes.len(), |e, j| {
        let ed = g.edge(e);
        (phi(ed.u, modes[j]) - phi(ed.v, modes[j])) / eig.values[modes[j]].sqrt()
    });
    let gg = grad.mul(&grad.transpose());
    let t = Matrix::from_fn(m, m, |e, f| g.conductance(f) * gg[(e, f)]);
    Ok(TransferCurrent { bc, c: g.edges().iter().map(|e| e.c).collect(), t })
}

impl TransferCurrent {
    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn edge_count(&self) -> usize {
        self.c.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.t
    }

    pub fn trace(&self) -> f64 {
        self.t.trace()
    }

    /// Full symmetric kernel `K`.
    pub fn k_full(&self) -> Matrix {
        let all: Vec<EdgeId> = (0..self.c.len()).collect();
        self.k_matrix(&all)
    }

    /// Largest violation of `c(e) T(e,f) = c(f) T(f,e)`.
    pub fn reciprocity_defect(&self) -> f64 {
        let m = self.c.len();
        let mut worst: f64 = 0.0;
        for e in 0..m {
            for f in 0..e {
                worst = worst.max((self.c[e] * self.t[(e, f)] - self.c[f] * self.t[(f, e)]).abs());
            }
        }
        worst
    }

    /// Largest entry of `K² − K`.
    pub fn projection_defect(&self) -> f64 {
        let k = self.k_full();
        k.mul(&k).max_abs_diff(&k)
    }
}

impl TransferKernel for TransferCurrent {
    fn t(&self, e: EdgeId, f: EdgeId) -> f64 {
        self.t[(e, f)]
    }

    fn conductance(&self, e: EdgeId) -> f64 {
        self.c[e]
    }
}

/// Transfer current with only selected columns materialised, for graphs too
/// large for the all-pairs matrix. `t(e, f)` needs `f` (or, through
/// reciprocity, `e`) among the selected edges.
#[derive(Debug, Clone)]
pub struct TransferColumns {
    c: Vec<f64>,
    cols: BTreeMap<EdgeId, Vec<f64>>,
}

impl TransferColumns {
    pub fn new(g: &WeightedGraph, gr: &GreenOperator, edges: &[EdgeId]) -> Self {
        let mut cols = BTreeMap::new();
        for &f in edges {
            cols.entry(f).or_insert_with(|| transfer_column(g, gr, f));
        }
        TransferColumns { c: g.edges().iter().map(|e| e.c).collect(), cols }
    }

    pub fn add(&mut self, g: &WeightedGraph, gr: &GreenOperator, f: EdgeId) {
        self.cols.entry(f).or_insert_with(|| transfer_column(g, gr, f));
    }

    pub fn has(&self, f: EdgeId) -> bool {
        self.cols.contains_key(&f)
    }
}

impl TransferKernel for TransferColumns {
    fn t(&self, e: EdgeId, f: EdgeId) -> f64 {
        if let Some(col) = self.cols.get(&f) {
            col[e]
        } else if let Some(col) = self.cols.get(&e) {
            self.c[f] / self.c[e] * col[f]
        } else {
            panic!("transfer column for edge {f} (or {e}) was not materialised")
        }
    }

    fn conductance(&self, e: EdgeId) -> f64 {
        self.c[e]
    }
}
