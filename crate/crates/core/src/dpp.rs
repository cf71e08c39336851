//! The spanning tree as a determinantal edge process with kernel `T` (or its
//! symmetric conjugate `K`), Wilson's algorithm, and the gradient of the
//! discrete Gaussian free field.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::graph::{BoundaryCondition, EdgeId, NodeView, VertexId, WeightedGraph};
use crate::green::{reduced_laplacian, unknowns_for, GreenError, GreenOperator, TransferKernel};
use crate::linalg::{determinant, symmetric_eigen, EnvelopeCholesky, LinalgError, Matrix};

/// Probabilities outside `[-PROB_SLACK, 1 + PROB_SLACK]` are reported as a
/// numerical failure rather than clamped.
pub const PROB_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DppError {
    #[error("edge {0} listed twice")]
    Duplicate(EdgeId),
    #[error("edge {0} is both present and absent, or shared by two patterns")]
    Overlap(EdgeId),
    #[error("pattern has empty support")]
    Empty,
    #[error("probability {0} is outside [0, 1] beyond tolerance")]
    OutOfRange(f64),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_distinct(edges: &[EdgeId]) -> Result<(), DppError> {
    for (i, &e) in edges.iter().enumerate() {
        if edges[..i].contains(&e) {
            return Err(DppError::Duplicate(e));
        }
    }
    Ok(())
}

fn clamp_prob(p: f64) -> Result<f64, DppError> {
    if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p) || p.is_nan() {
        return Err(DppError::OutOfRange(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `P(e₁, …, e_k ∈ tree) = det K_{e_i e_j}`.
pub fn edges_prob<K: TransferKernel + ?Sized>(k: &K, edges: &[EdgeId]) -> Result<f64, DppError> {
    check_distinct(edges)?;
    clamp_prob(determinant(&k.k_matrix(edges)))
}

/// Present and absent edges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Pattern {
    pub present: Vec<EdgeId>,
    pub absent: Vec<EdgeId>,
}

impl Pattern {
    pub fn new(present: Vec<EdgeId>, absent: Vec<EdgeId>) -> Result<Pattern, DppError> {
        let p = Pattern { present, absent };
        p.validate()?;
        Ok(p)
    }

    pub fn present(edges: &[EdgeId]) -> Pattern {
        Pattern { present: edges.to_vec(), absent: Vec::new() }
    }

    pub fn validate(&self) -> Result<(), DppError> {
        check_distinct(&self.present)?;
        check_distinct(&self.absent)?;
        if let Some(&e) = self.present.iter().find(|e| self.absent.contains(e)) {
            return Err(DppError::Overlap(e));
        }
        if self.present.is_empty() && self.absent.is_empty() {
            return Err(DppError::Empty);
        }
        Ok(())
    }

    /// Present edges first, then absent ones.
    pub fn support(&self) -> Vec<EdgeId> {
        self.present.iter().chain(&self.absent).copied().collect()
    }

    /// Centroid of the edge midpoints of the support.
    pub fn location(&self, g: &WeightedGraph) -> Vec<f64> {
        let sup = self.support();
        let mut c = vec![0.0; g.dim()];
        for &e in &sup {
            for (x, m) in c.iter_mut().zip(g.midpoint(e)) {
                *x += m;
            }
        }
        c.iter_mut().for_each(|x| *x /= sup.len() as f64);
        c
    }

    /// Whether the pattern occurs in a tree given as an edge-membership test.
    pub fn occurs(&self, in_tree: impl Fn(EdgeId) -> bool) -> bool {
        self.present.iter().all(|&e| in_tree(e)) && self.absent.iter().all(|&e| !in_tree(e))
    }

    fn joined(&self, other: &Pattern) -> Result<Pattern, DppError> {
        let a = self.support();
        if let Some(&e) = other.support().iter().find(|e| a.contains(e)) {
            return Err(DppError::Overlap(e));
        }
        let mut present = self.present.clone();
        present.extend(&other.present);
        let mut absent = self.absent.clone();
        absent.extend(&other.absent);
        Ok(Pattern { present, absent })
    }
}

/// `P(x₁ ⊆ tree, x₀ ∩ tree = ∅) = (−1)^{|x₀|} det(K − I_{x₀})` on the support.
pub fn pattern_prob<K: TransferKernel + ?Sized>(k: &K, p: &Pattern) -> Result<f64, DppError> {
    p.validate()?;
    let sup = p.support();
    let mut m = k.k_matrix(&sup);
    for i in p.present.len()..sup.len() {
        m[(i, i)] -= 1.0;
    }
    let sign = if p.absent.len() % 2 == 0 { 1.0 } else { -1.0 };
    clamp_prob(sign * determinant(&m))
}

/// `P(p and q) − P(p) P(q)` for patterns with disjoint supports.
pub fn pattern_cov<K: TransferKernel + ?Sized>(k: &K, p: &Pattern, q: &Pattern) -> Result<f64, DppError> {
    let joint = p.joined(q)?;
    Ok(pattern_prob(k, &joint)? - pattern_prob(k, p)? * pattern_prob(k, q)?)
}

/// Joint cumulant of the edge indicators, `det(T(e_i, e_j) 1_{i≠j})`.
pub fn cov_edges<K: TransferKernel + ?Sized>(k: &K, edges: &[EdgeId]) -> Result<f64, DppError> {
    check_distinct(edges)?;
    let mut m = k.t_matrix(edges);
    for i in 0..edges.len() {
        m[(i, i)] = 0.0;
    }
    Ok(determinant(&m))
}

/// Bernoulli parameters whose independent sum has the law of the number of
/// tree edges in `a`: the eigenvalues of `K_A`, clamped to `[0, 1]`.
pub fn counting_pgf<K: TransferKernel + ?Sized>(k: &K, a: &[EdgeId]) -> Result<Vec<f64>, DppError> {
    check_distinct(a)?;
    let eig = symmetric_eigen(&k.k_matrix(a));
    eig.values.into_iter().map(clamp_prob).collect()
}

/// `∏ (1 − λ + λ z)`.
pub fn pgf_eval(lambdas: &[f64], z: f64) -> f64 {
    lambdas.iter().map(|l| 1.0 - l + l * z).product()
}

/// `I − K`: the kernel of the complement of the tree.
pub struct Complement<'a, K: ?Sized>(pub &'a K);

impl<K: TransferKernel + ?Sized> TransferKernel for Complement<'_, K> {
    fn t(&self, e: EdgeId, f: EdgeId) -> f64 {
        let d = if e == f { 1.0 } else { 0.0 };
        d - self.0.t(e, f)
    }
    fn conductance(&self, e: EdgeId) -> f64 {
        self.0.conductance(e)
    }
}

/// Exact sampler of the weighted spanning tree measure by loop-erased random
/// walks. The tree lives on the [`NodeView`]: under wired conditions the walk
/// is absorbed by the merged boundary, under free conditions the root is
/// vertex 0.
#[derive(Debug, Clone)]
pub struct WilsonSampler {
    view: NodeView,
    start: Vec<usize>,
    /// `(other node, edge)` per adjacency slot.
    adj: Vec<(u32, u32)>,
    /// Cumulative conductance per slot, or empty when a node's edges all
    /// carry the same conductance.
    cum: Vec<f64>,
    uniform: Vec<bool>,
    in_tree: Vec<bool>,
    next: Vec<u32>,
    parent: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl WilsonSampler {
    pub fn new(g: &WeightedGraph, bc: BoundaryCondition) -> Result<WilsonSampler, DppError> {
        if bc == BoundaryCondition::Wired && g.boundary().is_empty() {
            return Err(GreenError::NoBoundary.into());
        }
        let view = NodeView::new(g, bc);
        let n = view.nodes;
        let mut lists: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        for &e in &view.edges {
            let (a, b) = view.ends(g, e);
            lists[a].push((b as u32, e as u32));
            lists[b].push((a as u32, e as u32));
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut adj = Vec::new();
        let mut cum = Vec::new();
        let mut uniform = Vec::with_capacity(n);
        for l in &lists {
            start.push(adj.len());
            let c0 = l.first().map(|&(_, e)| g.conductance(e as usize));
            uniform.push(l.iter().all(|&(_, e)| Some(g.conductance(e as usize)) == c0));
            let mut acc = 0.0;
            for &(o, e) in l {
                acc += g.conductance(e as usize);
                adj.push((o, e));
                cum.push(acc);
            }
        }
        start.push(adj.len());
        Ok(WilsonSampler {
            view,
            start,
            adj,
            cum,
            uniform,
            in_tree: vec![false; n],
            next: vec![NONE; n],
            parent: vec![NONE; n],
        })
    }

    pub fn view(&self) -> &NodeView {
        &self.view
    }

    #[inline]
    fn step<R: Rng + ?Sized>(&self, u: usize, rng: &mut R) -> usize {
        let (s, t) = (self.start[u], self.start[u + 1]);
        if self.uniform[u] {
            s + rng.random_range(0..t - s)
        } else {
            let total = self.cum[t - 1];
            let r = rng.random::<f64>() * total;
            s + self.cum[s..t].partition_point(|&c| c <= r).min(t - s - 1)
        }
    }

    /// Draws a new tree into the internal parent table.
    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.view.nodes;
        self.in_tree.iter_mut().for_each(|x| *x = false);
        self.parent.iter_mut().for_each(|x| *x = NONE);
        self.in_tree[self.view.root] = true;
        for i in 0..n {
            let mut u = i;
            while !self.in_tree[u] {
                let slot = self.step(u, rng);
                self.next[u] = slot as u32;
                u = self.adj[slot].0 as usize;
            }
            let mut u = i;
            while !self.in_tree[u] {
                self.in_tree[u] = true;
                let (o, e) = self.adj[self.next[u] as usize];
                self.parent[u] = e;
                u = o as usize;
            }
        }
    }

    /// Edge from `node` towards the root in the last tree.
    pub fn parent_edge(&self, node: usize) -> Option<EdgeId> {
        let e = self.parent[node];
        (e != NONE).then_some(e as usize)
    }

    /// Parent node of `node` in the last tree.
    pub fn parent_node(&self, g: &WeightedGraph, node: usize) -> Option<usize> {
        self.parent_edge(node).map(|e| {
            let (a, b) = self.view.ends(g, e);
            if a == node {
                b
            } else {
                a
            }
        })
    }

    /// Edges of the last tree, sorted.
    pub fn tree_edges(&self) -> Vec<EdgeId> {
        let mut v: Vec<EdgeId> = (0..self.view.nodes).filter_map(|x| self.parent_edge(x)).collect();
        v.sort_unstable();
        v
    }

    /// Membership table of the last tree, indexed by edge id.
    pub fn membership(&self, edge_count: usize) -> Vec<bool> {
        let mut m = vec![false; edge_count];
        for x in 0..self.view.nodes {
            if let Some(e) = self.parent_edge(x) {
                m[e] = true;
            }
        }
        m
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<EdgeId> {
        self.run(rng);
        self.tree_edges()
    }
}

/// Sampler of the discrete Gaussian free field with covariance `G`.
#[derive(Debug, Clone)]
pub struct DgffSampler {
    bc: BoundaryCondition,
    n: usize,
    unknowns: Vec<VertexId>,
    factor: EnvelopeCholesky,
}

impl DgffSampler {
    pub fn new(g: &WeightedGraph, bc: BoundaryCondition) -> Result<DgffSampler, DppError> {
        let unknowns = unknowns_for(g, bc)?;
        let mut slot = vec![None; g.vertex_count()];
        for (i, &v) in unknowns.iter().enumerate() {
            slot[v] = Some(i);
        }
        let lap = reduced_laplacian(g, &slot, unknowns.len());
        let factor = EnvelopeCholesky::new(&lap)?;
        Ok(DgffSampler { bc, n: g.vertex_count(), unknowns, factor })
    }

    /// One draw of `Γ`. Wired: zero on `∂V`. Free: a field grounded at
    /// vertex 0, then projected to mean zero, which has covariance exactly
    /// `P G_r P = G`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.unknowns.len()).map(|_| rng.sample(StandardNormal)).collect();
        let x = self.factor.solve_transpose_factor(&z);
        let mut out = vec![0.0; self.n];
        for (i, &v) in self.unknowns.iter().enumerate() {
            out[v] = x[i];
        }
        if self.bc == BoundaryCondition::Free {
            let m = out.iter().sum::<f64>() / self.n as f64;
            out.iter_mut().for_each(|v| *v -= m);
        }
        out
    }
}

/// `J = dΓ` evaluated on every edge in its reference orientation.
pub fn flow(g: &WeightedGraph, gamma: &[f64]) -> Vec<f64> {
    g.edges().iter().map(|e| gamma[e.v] - gamma[e.u]).collect()
}

/// `Cov(J(e), J(f))` computed from `G` alone.
pub fn dgff_flow_cov(g: &WeightedGraph, gr: &GreenOperator, edges: &[EdgeId]) -> Matrix {
    let cols: Vec<(Vec<f64>, Vec<f64>)> = edges
        .iter()
        .map(|&f| {
            let ed = g.edge(f);
            (gr.column(ed.u), gr.column(ed.v))
        })
        .collect();
    Matrix::from_fn(edges.len(), edges.len(), |i, j| {
        let e = g.edge(edges[i]);
        let (gu, gv) = &cols[j];
        (gv[e.v] - gu[e.v]) - (gv[e.u] - gu[e.u])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::triangle;
    use crate::graph::{Edge, Vertex};
    use crate::green::{green, transfer_current};
    use crate::oracle::{enumerate, Kind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triangle_probabilities() {
        let t = transfer_current(&triangle([1.0; 3]), BoundaryCondition::Free).unwrap();
        assert!((edges_prob(&t, &[0]).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!((edges_prob(&t, &[0, 1]).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!(edges_prob(&t, &[0, 1, 2]).unwrap().abs() < 1e-14);
        assert_eq!(edges_prob(&t, &[0, 0]).unwrap_err(), DppError::Duplicate(0));
        let p = Pattern::new(vec![0], vec![1]).unwrap();
        assert!((pattern_prob(&t, &p).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        let p = Pattern::new(vec![0, 1], vec![2]).unwrap();
        assert!((pattern_prob(&t, &p).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((cov_edges(&t, &[0, 1]).unwrap() + 1.0 / 9.0).abs() < 1e-14);
        assert_eq!(cov_edges(&t, &[0]).unwrap(), 0.0);
        let c = pattern_cov(&t, &Pattern::present(&[0]), &Pattern::present(&[1])).unwrap();
        assert!((c + t.k(0, 1).powi(2)).abs() < 1e-14);
        assert!(pattern_cov(&t, &Pattern::present(&[0]), &Pattern::present(&[0])).is_err());
    }

    #[test]
    fn pgf_of_whole_triangle_is_deterministic() {
        let t = transfer_current(&triangle([1.0, 2.0, 3.0]), BoundaryCondition::Free).unwrap();
        let mut l = counting_pgf(&t, &[0, 1, 2]).unwrap();
        l.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(l[0] < 1e-12 && (l[1] - 1.0).abs() < 1e-12 && (l[2] - 1.0).abs() < 1e-12);
        assert!((pgf_eval(&l, 2.0) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn patterns_on_a_support_sum_to_one_and_complement() {
        let t = transfer_current(&triangle([1.0, 2.0, 0.5]), BoundaryCondition::Free).unwrap();
        let sup = [0usize, 2];
        let mut total = 0.0;
        for mask in 0..4u32 {
            let present: Vec<_> = (0..2).filter(|i| mask >> i & 1 == 1).map(|i| sup[i]).collect();
            let absent: Vec<_> = (0..2).filter(|i| mask >> i & 1 == 0).map(|i| sup[i]).collect();
            let p = Pattern::new(present.clone(), absent.clone()).unwrap();
            let pr = pattern_prob(&t, &p).unwrap();
            total += pr;
            let q = Pattern::new(absent, present).unwrap();
            assert!((pr - pattern_prob(&Complement(&t), &q).unwrap()).abs() < 1e-12);
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wilson_weighted_triangle_frequency() {
        let g = triangle([1.0, 1.0, 2.0]);
        let mut w = WilsonSampler::new(&g, BoundaryCondition::Free).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 60_000;
        let hits = (0..n).filter(|_| w.sample(&mut rng) == vec![0, 2]).count();
        let p = 0.4;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 4.0 * sd);
    }

    #[test]
    fn wilson_tree_is_spanning() {
        let g = triangle([1.0, 3.0, 2.0]);
        let mut w = WilsonSampler::new(&g, BoundaryCondition::Free).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trees = enumerate(&g, BoundaryCondition::Free, Kind::Tree).unwrap();
        for _ in 0..100 {
            let t = w.sample(&mut rng);
            assert!(trees.items.iter().any(|i| i.edges == t));
        }
    }

    #[test]
    fn flow_covariance_is_transfer_current() {
        let v = |x: f64, b| Vertex { pos: vec![x, 0.0], boundary: b };
        let g = WeightedGraph::new(
            2,
            vec![v(0.0, true), v(1.0, false), v(2.0, true)],
            vec![Edge { u: 0, v: 1, c: 1.0 }, Edge { u: 1, v: 2, c: 1.0 }],
        )
        .unwrap();
        let gr = green(&g, BoundaryCondition::Wired).unwrap();
        let c = dgff_flow_cov(&g, &gr, &[0, 1]);
        assert!((c[(0, 0)] - 0.5).abs() < 1e-15);
        let g = triangle([1.0, 2.0, 0.5]);
        let gr = green(&g, BoundaryCondition::Free).unwrap();
        let t = transfer_current(&g, BoundaryCondition::Free).unwrap();
        let c = dgff_flow_cov(&g, &gr, &[0, 1, 2]);
        for e in 0..3 {
            for f in 0..3 {
                assert!((c[(e, f)] - t.t(e, f) / g.conductance(f)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dgff_free_sample_is_mean_zero() {
        let g = triangle([1.0, 2.0, 0.5]);
        let s = DgffSampler::new(&g, BoundaryCondition::Free).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = s.sample(&mut rng);
        assert!(x.iter().sum::<f64>().abs() < 1e-12);
    }
}
