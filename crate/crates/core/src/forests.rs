//! Spanning-tree counts, two-component forests and spanning unicycles.
//!
//! Unicycle identities rest on one fact: for a 1-form `θ`, summing the squared
//! circulation `θ(γ)` of the cycle over all unicycles gives
//! `κ ⟨θ, (I − T) θ⟩`. Polarising in `θ` turns this into statements about
//! pairs of edges on the cycle, about faces enclosed by the cycle (planar
//! case) and about winding around a line (three dimensions).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;
use rand::Rng;

use crate::dpp::{edges_prob, DppError, WilsonSampler};
use crate::graph::{planar_dual, BoundaryCondition, DirectedEdge, EdgeId, GraphError, NodeView, WeightedGraph};
use crate::green::{green, reduced_laplacian, unknowns_for, GreenError, TransferKernel};
use crate::linalg::{Cholesky, EnvelopeCholesky, Matrix};
use crate::oracle::{components, enumerate, unicycle_cycle, Enumeration, Kind, OracleError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForestError {
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dpp(#[from] DppError),
    #[error("{0}")]
    Invalid(&'static str),
}

/// `log κ`: log-determinant of the Laplacian on the unknowns (interior for
/// wired, all but vertex 0 for free).
pub fn log_kappa(g: &WeightedGraph, bc: BoundaryCondition) -> Result<f64, ForestError> {
    let unknowns = unknowns_for(g, bc)?;
    let k = unknowns.len();
    if k == 0 {
        return Ok(0.0);
    }
    let mut slot = vec![None; g.vertex_count()];
    for (i, &v) in unknowns.iter().enumerate() {
        slot[v] = Some(i);
    }
    let lap = reduced_laplacian(g, &slot, k);
    if k <= 2000 {
        let dense = Matrix::from_fn(k, k, |i, j| lap.row(i).iter().find(|(c, _)| *c == j).map_or(0.0, |x| x.1));
        Ok(Cholesky::new(&dense).map_err(GreenError::from)?.log_det())
    } else {
        Ok(EnvelopeCholesky::new(&lap).map_err(GreenError::from)?.log_det())
    }
}

/// Weighted number of spanning trees (matrix-tree theorem).
pub fn kappa(g: &WeightedGraph, bc: BoundaryCondition) -> Result<f64, ForestError> {
    Ok(log_kappa(g, bc)?.exp())
}

/// `T` in a given pair of orientations.
pub fn oriented_t<K: TransferKernel + ?Sized>(k: &K, a: DirectedEdge, b: DirectedEdge) -> f64 {
    a.sign() * b.sign() * k.t(a.edge, b.edge)
}

/// Weight of two-component forests separating the tail of `a` from its head
/// and the tail of `b` from its head, with the two tails together.
pub fn forests_joining_tails(g: &WeightedGraph, view: &NodeView, forests: &Enumeration, a: DirectedEdge, b: DirectedEdge) -> f64 {
    let ends = |d: DirectedEdge| {
        let (x, y) = g.endpoints(d);
        (view.node[x], view.node[y])
    };
    let (x, y) = ends(a);
    let (u, v) = ends(b);
    forests.event_weight(|s| {
        let c = components(g, view, s);
        c[x] != c[y] && c[x] == c[u] && c[y] == c[v]
    })
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn diff(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// `T(a, b) = c(b) κ⁻¹ (N_{a,b} − N_{a,−b})`, where `N_{a,b}` is the weight of
/// two-component forests with the tails of `a` and `b` in one component and
/// both heads in the other. Under wired conditions forests live on the graph
/// with `∂V` glued.
pub fn two_forest_check<K: TransferKernel + ?Sized>(
    g: &WeightedGraph,
    bc: BoundaryCondition,
    k: &K,
    a: DirectedEdge,
    b: DirectedEdge,
) -> Result<IdentityCheck, ForestError> {
    let trees = enumerate(g, bc, Kind::Tree)?;
    let forests = enumerate(g, bc, Kind::TwoForest)?;
    let view = NodeView::new(g, bc);
    let n = forests_joining_tails(g, &view, &forests, a, b) - forests_joining_tails(g, &view, &forests, a, b.rev());
    Ok(IdentityCheck { lhs: oriented_t(k, a, b), rhs: g.conductance(b.edge) * n / trees.total })
}

/// `⟨θ, (I − T) θ⟩` for a sparse form given as `(edge, value)` pairs in the
/// reference orientation.
pub fn cycle_quadratic<K: TransferKernel + ?Sized>(k: &K, theta: &[(EdgeId, f64)]) -> f64 {
    let mut s = 0.0;
    for &(e, a) in theta {
        let c = k.conductance(e);
        s += c * a * a;
        for &(f, b) in theta {
            s -= c * a * k.t(e, f) * b;
        }
    }
    s
}

/// Circulation `θ(γ)` of a form around an oriented cycle.
pub fn circulation(theta: &[f64], cycle: &[DirectedEdge]) -> f64 {
    cycle.iter().map(|d| d.sign() * theta[d.edge]).sum()
}

/// `(Σ_U w(U) θ(γ_U)², κ ⟨θ, (I − T) θ⟩)` with unicycles enumerated.
pub fn unicycle_quadratic<K: TransferKernel + ?Sized>(
    g: &WeightedGraph,
    bc: BoundaryCondition,
    k: &K,
    theta: &[f64],
) -> Result<IdentityCheck, ForestError> {
    let view = NodeView::new(g, bc);
    let unis = enumerate(g, bc, Kind::Unicycle)?;
    let trees = enumerate(g, bc, Kind::Tree)?;
    let lhs = unis
        .items
        .iter()
        .map(|u| u.weight * circulation(theta, &unicycle_cycle(g, &view, &u.edges)).powi(2))
        .sum();
    let sparse: Vec<(EdgeId, f64)> = theta.iter().copied().enumerate().filter(|x| x.1 != 0.0).collect();
    Ok(IdentityCheck { lhs, rhs: trees.total * cycle_quadratic(k, &sparse) })
}

/// `N_{a,b} − N_{a,−b} = κ c(a) (δ_ab − T(a, b))`: unicycles whose cycle runs
/// through `a` and `b` in matching orientations, minus opposite ones.
pub fn unicycle_pair_check<K: TransferKernel + ?Sized>(
    g: &WeightedGraph,
    bc: BoundaryCondition,
    k: &K,
    a: DirectedEdge,
    b: DirectedEdge,
) -> Result<IdentityCheck, ForestError> {
    let view = NodeView::new(g, bc);
    let unis = enumerate(g, bc, Kind::Unicycle)?;
    let kap = enumerate(g, bc, Kind::Tree)?.total;
    let mut lhs = 0.0;
    for u in &unis.items {
        let cyc = unicycle_cycle(g, &view, &u.edges);
        let sa = cyc.iter().find(|d| d.edge == a.edge).map(|d| d.sign() * a.sign());
        let sb = cyc.iter().find(|d| d.edge == b.edge).map(|d| d.sign() * b.sign());
        if let (Some(x), Some(y)) = (sa, sb) {
            lhs += u.weight * x * y;
        }
    }
    let delta = if a.edge == b.edge { 1.0 } else { 0.0 };
    let rhs = kap * g.conductance(a.edge) * (a.sign() * b.sign() * delta - oriented_t(k, a, b));
    Ok(IdentityCheck { lhs, rhs })
}

/// Largest difference between the law of the cycle of a unicycle conditioned
/// to pass through `e`, and the law of `e` plus the tree path between its
/// endpoints in a spanning tree of the graph with `e` removed.
pub fn conditional_cycle_law_check(g: &WeightedGraph, e: EdgeId) -> Result<f64, ForestError> {
    let bc = BoundaryCondition::Free;
    let view = NodeView::new(g, bc);
    let unis = enumerate(g, bc, Kind::Unicycle)?;
    let mut law_u: BTreeMap<Vec<EdgeId>, f64> = BTreeMap::new();
    let mut total_u = 0.0;
    for u in &unis.items {
        let mut cyc: Vec<EdgeId> = unicycle_cycle(g, &view, &u.edges).iter().map(|d| d.edge).collect();
        if cyc.contains(&e) {
            cyc.sort_unstable();
            *law_u.entry(cyc).or_default() += u.weight;
            total_u += u.weight;
        }
    }
    let keep: Vec<EdgeId> = (0..g.edge_count()).filter(|&f| f != e).collect();
    let mut edges = Vec::new();
    for &f in &keep {
        edges.push(*g.edge(f));
    }
    let h = WeightedGraph::new(g.dim(), g.vertices().to_vec(), edges)
        .map_err(|_| ForestError::Invalid("removing the edge disconnects the graph"))?;
    let trees = enumerate(&h, bc, Kind::Tree)?;
    let hview = NodeView::new(&h, bc);
    let (x, y) = (g.edge(e).u, g.edge(e).v);
    let mut law_t: BTreeMap<Vec<EdgeId>, f64> = BTreeMap::new();
    for t in &trees.items {
        let mut path: Vec<EdgeId> = tree_path(&h, &hview, &t.edges, x, y).into_iter().map(|f| keep[f]).collect();
        path.push(e);
        path.sort_unstable();
        *law_t.entry(path).or_default() += t.weight;
    }
    let mut worst: f64 = 0.0;
    for key in law_u.keys().chain(law_t.keys()) {
        let pu = law_u.get(key).copied().unwrap_or(0.0) / total_u;
        let pt = law_t.get(key).copied().unwrap_or(0.0) / trees.total;
        worst = worst.max((pu - pt).abs());
    }
    Ok(worst)
}

/// Edges of the path from `x` to `y` inside a tree.
fn tree_path(g: &WeightedGraph, view: &NodeView, tree: &[EdgeId], x: usize, y: usize) -> Vec<EdgeId> {
    let n = view.nodes;
    let mut adj: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); n];
    for &e in tree {
        let (a, b) = view.ends(g, e);
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let (sx, sy) = (view.node[x], view.node[y]);
    let mut prev: Vec<Option<(usize, EdgeId)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut stack = vec![sx];
    seen[sx] = true;
    while let Some(a) = stack.pop() {
        for &(b, e) in &adj[a] {
            if !seen[b] {
                seen[b] = true;
                prev[b] = Some((a, e));
                stack.push(b);
            }
        }
    }
    let mut path = Vec::new();
    let mut at = sy;
    while let Some((p, e)) = prev[at] {
        path.push(e);
        at = p;
    }
    path
}

/// Unicycles drawn as a Wilson tree plus one non-tree edge chosen with
/// probability proportional to its conductance. A draw `(T, e)` returns
/// `X = C_out(T) / L`, where `C_out` is the total conductance off the tree and
/// `L` the cycle length; `E X = λ / κ`, and `X` is also the importance weight
/// that turns draws into the unicycle measure.
#[derive(Debug, Clone)]
pub struct UnicycleSampler {
    wilson: WilsonSampler,
    ends: Vec<(u32, u32)>,
    cum: Vec<f64>,
    total: f64,
    stamp: Vec<u32>,
    step: Vec<u32>,
    gen: u32,
}

/// One importance-sampled unicycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnicycleDraw {
    pub extra: EdgeId,
    pub length: usize,
    pub weight: f64,
}

impl UnicycleSampler {
    pub fn new(g: &WeightedGraph, bc: BoundaryCondition) -> Result<Self, ForestError> {
        let wilson = WilsonSampler::new(g, bc)?;
        let view = wilson.view().clone();
        let mut ends = vec![(u32::MAX, u32::MAX); g.edge_count()];
        let mut cum = vec![0.0; g.edge_count()];
        let mut acc = 0.0;
        let allowed: Vec<bool> = {
            let mut a = vec![false; g.edge_count()];
            view.edges.iter().for_each(|&e| a[e] = true);
            a
        };
        for e in 0..g.edge_count() {
            if allowed[e] {
                let (a, b) = view.ends(g, e);
                ends[e] = (a as u32, b as u32);
                acc += g.conductance(e);
            }
            cum[e] = acc;
        }
        if view.edges.len() < view.nodes {
            return Err(ForestError::Invalid("graph is a tree and has no unicycles"));
        }
        let n = view.nodes;
        Ok(UnicycleSampler { wilson, ends, cum, total: acc, stamp: vec![0; n], step: vec![0; n], gen: 0 })
    }

    pub fn wilson(&self) -> &WilsonSampler {
        &self.wilson
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, g: &WeightedGraph, rng: &mut R) -> UnicycleDraw {
        self.wilson.run(rng);
        let mut tree_c = 0.0;
        for x in 0..self.wilson.view().nodes {
            if let Some(e) = self.wilson.parent_edge(x) {
                tree_c += g.conductance(e);
            }
        }
        let out = self.total - tree_c;
        let extra = loop {
            let r = rng.random::<f64>() * self.total;
            let e = self.cum.partition_point(|&c| c <= r).min(self.cum.len() - 1);
            let (a, b) = self.ends[e];
            if a == u32::MAX {
                continue;
            }
            let in_tree = self.wilson.parent_edge(a as usize) == Some(e) || self.wilson.parent_edge(b as usize) == Some(e);
            if !in_tree {
                break e;
            }
        };
        let (a, b) = self.ends[extra];
        let length = self.tree_distance(g, a as usize, b as usize) + 1;
        UnicycleDraw { extra, length, weight: out / length as f64 }
    }

    fn tree_distance(&mut self, g: &WeightedGraph, a: usize, b: usize) -> usize {
        self.gen = self.gen.wrapping_add(1);
        if self.gen == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.gen = 1;
        }
        let mut x = a;
        let mut d = 0u32;
        loop {
            self.stamp[x] = self.gen;
            self.step[x] = d;
            match self.wilson.parent_node(g, x) {
                Some(p) => {
                    x = p;
                    d += 1;
                }
                None => break,
            }
        }
        let mut y = b;
        let mut k = 0u32;
        while self.stamp[y] != self.gen {
            y = self.wilson.parent_node(g, y).expect("tree reaches the root");
            k += 1;
        }
        (self.step[y] + k) as usize
    }
}

/// `Σ_{U : γ_U = face} w(U) / κ = c(e₄) P(e₁, e₂, e₃)` for a cycle
/// `e₁ e₂ e₃ e₄`: every such unicycle is a tree through three of the edges
/// plus the fourth.
pub fn four_cycle_weight<K: TransferKernel + ?Sized>(k: &K, cycle: [EdgeId; 4]) -> Result<f64, ForestError> {
    Ok(k.conductance(cycle[3]) * edges_prob(k, &cycle[..3])?)
}

/// Probability that two faces lie inside the cycle of the unicycle.
#[derive(Debug, Clone, Copy)]
pub struct FaceEnclosure {
    /// `(κ/λ) ⟨θ_Z, (I − T) θ_Z'⟩` with `Z`, `Z'` dual paths from the outer
    /// face.
    pub crossing_form: f64,
    /// `(κ/λ) G*(f, f')`, the dual Green function grounded at the outer face.
    pub dual_green_form: f64,
}

/// Dual path (as a signed primal 1-form) from the outer face to `f`: each
/// crossed edge gets `+1` when crossed from its right to its left.
pub fn crossing_form(g: &WeightedGraph, f: usize) -> Result<Vec<f64>, ForestError> {
    let dual = planar_dual(g)?;
    let nf = dual.graph.vertex_count();
    if f >= nf {
        return Err(ForestError::Invalid("face index out of range"));
    }
    let mut prev: Vec<Option<(usize, DirectedEdge)>> = vec![None; nf];
    let mut seen = vec![false; nf];
    let mut queue = alloc::collections::VecDeque::from([dual.outer_face]);
    seen[dual.outer_face] = true;
    while let Some(a) = queue.pop_front() {
        for &e in dual.graph.incident(a) {
            let ed = dual.graph.edge(e);
            let (b, d) = if ed.u == a { (ed.v, DirectedEdge::forward(e)) } else { (ed.u, DirectedEdge::backward(e)) };
            if !seen[b] {
                seen[b] = true;
                prev[b] = Some((a, d));
                queue.push_back(b);
            }
        }
    }
    let mut theta = vec![0.0; g.edge_count()];
    let mut at = f;
    while let Some((p, d)) = prev[at] {
        theta[d.edge] += d.sign();
        at = p;
    }
    Ok(theta)
}

/// Probability that faces `f` and `f'` both lie inside the cycle, given
/// `λ/κ`. Free boundary.
pub fn face_enclosure_prob<K: TransferKernel + ?Sized>(
    g: &WeightedGraph,
    k: &K,
    f: usize,
    f2: usize,
    lambda_over_kappa: f64,
) -> Result<FaceEnclosure, ForestError> {
    let a = crossing_form(g, f)?;
    let b = crossing_form(g, f2)?;
    let mut q = 0.0;
    for e in 0..g.edge_count() {
        if a[e] == 0.0 {
            continue;
        }
        q += g.conductance(e) * a[e] * b[e];
        for h in 0..g.edge_count() {
            if b[h] != 0.0 {
                q -= g.conductance(e) * a[e] * k.t(e, h) * b[h];
            }
        }
    }
    let dual = planar_dual(g)?;
    let mut vs = dual.graph.vertices().to_vec();
    vs[dual.outer_face].boundary = true;
    let grounded = WeightedGraph::new(dual.graph.dim(), vs, dual.graph.edges().to_vec())?;
    let gstar = green(&grounded, BoundaryCondition::Wired)?;
    Ok(FaceEnclosure { crossing_form: q / lambda_over_kappa, dual_green_form: gstar.value(f, f2) / lambda_over_kappa })
}

/// Curtain form of a line parallel to the last axis through `(ax, ay)` in a
/// three-dimensional graph: `+1` on edges crossing the half-plane
/// `{y = ay, x > ax}` in the `+y` direction. Its circulation around a cycle
/// is the cycle's winding number around the line.
pub fn curtain_form(g: &WeightedGraph, ax: f64, ay: f64) -> Vec<f64> {
    g.edges()
        .iter()
        .map(|e| {
            let (p, q) = (&g.vertex(e.u).pos, &g.vertex(e.v).pos);
            let (y0, y1) = (p[1], q[1]);
            if (y0 - ay) * (y1 - ay) >= 0.0 {
                return 0.0;
            }
            let t = (ay - y0) / (y1 - y0);
            let x = p[0] + t * (q[0] - p[0]);
            if x > ax {
                if y1 > y0 {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            }
        })
        .collect()
}

/// `E(k²) = (κ/λ) ⟨θ, (I − T) θ⟩` for the curtain form `θ`.
pub fn winding_second_moment<K: TransferKernel + ?Sized>(k: &K, theta: &[f64], lambda_over_kappa: f64) -> f64 {
    let sparse: Vec<(EdgeId, f64)> = theta.iter().copied().enumerate().filter(|x| x.1 != 0.0).collect();
    cycle_quadratic(k, &sparse) / lambda_over_kappa
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{corpus, grid_in_domain, DomainSpec};
    use crate::graph::tests::triangle;
    use crate::graph::{Edge, Vertex};
    use crate::green::transfer_current;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kappa_values() {
        assert!((kappa(&triangle([1.0; 3]), BoundaryCondition::Free).unwrap() - 3.0).abs() < 1e-12);
        assert!((kappa(&triangle([1.0, 1.0, 2.0]), BoundaryCondition::Free).unwrap() - 5.0).abs() < 1e-12);
        for c in corpus() {
            let k = kappa(&c.graph, c.bc).unwrap();
            let o = enumerate(&c.graph, c.bc, Kind::Tree).unwrap().total;
            assert!((k - o).abs() < 1e-9 * o, "{}", c.name);
        }
    }

    #[test]
    fn two_forests_on_wired_path() {
        let v = |x: f64, b| Vertex { pos: vec![x, 0.0], boundary: b };
        let g = WeightedGraph::new(
            2,
            vec![v(0.0, true), v(1.0, false), v(2.0, true)],
            vec![Edge { u: 0, v: 1, c: 1.0 }, Edge { u: 1, v: 2, c: 1.0 }],
        )
        .unwrap();
        let t = transfer_current(&g, BoundaryCondition::Wired).unwrap();
        let e = DirectedEdge::forward(0);
        let r = two_forest_check(&g, BoundaryCondition::Wired, &t, e, e).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-15 && (r.rhs - 0.5).abs() < 1e-15);
        let r2 = two_forest_check(&g, BoundaryCondition::Wired, &t, e, e.rev()).unwrap();
        assert!((r2.rhs + r.rhs).abs() < 1e-15);
    }

    #[test]
    fn two_forests_across_corpus() {
        for c in corpus().iter().filter(|c| c.graph.edge_count() <= 9) {
            let t = transfer_current(&c.graph, c.bc).unwrap();
            for a in 0..c.graph.edge_count() {
                for b in 0..c.graph.edge_count() {
                    let r = two_forest_check(&c.graph, c.bc, &t, DirectedEdge::forward(a), DirectedEdge::backward(b)).unwrap();
                    assert!(r.diff() < 1e-10, "{} {a} {b}: {r:?}", c.name);
                }
            }
        }
    }

    #[test]
    fn green_function_counts_forests() {
        // κ G(x, y) is the weight of 2-forests with x and y away from the sink
        let g = grid_in_domain(&DomainSpec::unit_square(), 3, BoundaryCondition::Wired).unwrap().graph;
        let bc = BoundaryCondition::Wired;
        let view = NodeView::new(&g, bc);
        let f = enumerate(&g, bc, Kind::TwoForest).unwrap();
        let kap = enumerate(&g, bc, Kind::Tree).unwrap().total;
        let gr = green(&g, bc).unwrap();
        for x in g.interior() {
            for y in g.interior() {
                let w = f.event_weight(|s| {
                    let c = components(&g, &view, s);
                    c[view.node[x]] == c[view.node[y]] && c[view.node[x]] != c[view.root]
                });
                assert!((w / kap - gr.value(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn triangle_unicycle_quadratic() {
        let g = triangle([1.0; 3]);
        let t = transfer_current(&g, BoundaryCondition::Free).unwrap();
        let r = unicycle_quadratic(&g, BoundaryCondition::Free, &t, &[1.0, 0.0, 0.0]).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-14 && (r.rhs - 1.0).abs() < 1e-12);
        // exact forms have no circulation
        let df = [1.0 - 0.0, 2.0 - 1.0, 0.0 - 2.0];
        let r = unicycle_quadratic(&g, BoundaryCondition::Free, &t, &df).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12);
    }

    #[test]
    fn pair_and_conditional_laws() {
        let c = corpus();
        let g = &c.iter().find(|g| g.name == "k4").unwrap().graph;
        let t = transfer_current(g, BoundaryCondition::Free).unwrap();
        for a in 0..g.edge_count() {
            for b in 0..g.edge_count() {
                for d in [DirectedEdge::forward(b), DirectedEdge::backward(b)] {
                    let r = unicycle_pair_check(g, BoundaryCondition::Free, &t, DirectedEdge::forward(a), d).unwrap();
                    assert!(r.diff() < 1e-9);
                }
            }
            assert!(conditional_cycle_law_check(g, a).unwrap() < 1e-12);
        }
    }

    #[test]
    fn dual_transfer_current_counts_unicycle_pairs() {
        // T*(a*, b*) = (N_{a,b} − N_{a,−b}) / (κ c(b)) with unicycles of the primal
        let c = corpus();
        let g = &c.iter().find(|g| g.name == "wheel5").unwrap().graph;
        let dual = planar_dual(g).unwrap();
        let td = transfer_current(&dual.graph, BoundaryCondition::Free).unwrap();
        let t = transfer_current(g, BoundaryCondition::Free).unwrap();
        let kap = kappa(g, BoundaryCondition::Free).unwrap();
        for a in 0..g.edge_count() {
            for b in 0..g.edge_count() {
                let r = unicycle_pair_check(g, BoundaryCondition::Free, &t, DirectedEdge::forward(a), DirectedEdge::forward(b))
                    .unwrap();
                assert!((td.t(a, b) - r.lhs / (kap * g.conductance(b))).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn four_cycle_weight_does_not_depend_on_the_left_out_edge() {
        let c = corpus();
        let g = &c.iter().find(|g| g.name == "grid3x3").unwrap().graph;
        let t = transfer_current(g, BoundaryCondition::Free).unwrap();
        let unis = enumerate(g, BoundaryCondition::Free, Kind::Unicycle).unwrap();
        let view = NodeView::new(g, BoundaryCondition::Free);
        // first square face: edges around lattice square at the origin
        let face = crate::graph::trace_faces(g).unwrap();
        let sq: Vec<EdgeId> = face.faces.iter().find(|f| f.len() == 4).unwrap().iter().map(|d| d.edge).collect();
        let mut want = 0.0;
        for u in &unis.items {
            let mut cyc: Vec<EdgeId> = unicycle_cycle(g, &view, &u.edges).iter().map(|d| d.edge).collect();
            cyc.sort_unstable();
            let mut s = sq.clone();
            s.sort_unstable();
            if cyc == s {
                want += u.weight;
            }
        }
        let kap = kappa(g, BoundaryCondition::Free).unwrap();
        for r in 0..4 {
            let cyc = [sq[r], sq[(r + 1) % 4], sq[(r + 2) % 4], sq[(r + 3) % 4]];
            assert!((four_cycle_weight(&t, cyc).unwrap() * kap - want).abs() < 1e-9);
        }
    }

    #[test]
    fn triangle_face_enclosure() {
        let c = corpus();
        let g = &c.iter().find(|g| g.name == "triangle").unwrap().graph;
        let t = transfer_current(g, BoundaryCondition::Free).unwrap();
        let dual = planar_dual(g).unwrap();
        let inner = 1 - dual.outer_face;
        let r = face_enclosure_prob(g, &t, inner, inner, 1.0 / 3.0).unwrap();
        assert!((r.crossing_form - 1.0).abs() < 1e-12 && (r.dual_green_form - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unicycle_estimator_on_triangle() {
        let g = triangle([1.0; 3]);
        let mut s = UnicycleSampler::new(&g, BoundaryCondition::Free).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let d = s.draw(&g, &mut rng);
            assert_eq!(d.length, 3);
            assert!((d.weight - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unicycle_estimator_is_unbiased_on_weighted_graph() {
        let c = corpus();
        let g = &c.iter().find(|g| g.name == "k4").unwrap().graph;
        let bc = BoundaryCondition::Free;
        let exact = enumerate(g, bc, Kind::Unicycle).unwrap().total / enumerate(g, bc, Kind::Tree).unwrap().total;
        let mut s = UnicycleSampler::new(g, bc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40_000;
        let xs: Vec<f64> = (0..n).map(|_| s.draw(g, &mut rng).weight).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - exact).abs() < 4.0 * (var / n as f64).sqrt(), "{mean} vs {exact}");
    }

    #[test]
    fn winding_on_cube_matches_enumeration() {
        let c = corpus();
        let g = &c.iter().find(|g| g.name == "cube").unwrap().graph;
        let bc = BoundaryCondition::Free;
        let theta = curtain_form(g, 0.5, 0.5);
        assert_eq!(theta.iter().filter(|x| **x != 0.0).count(), 2);
        let t = transfer_current(g, bc).unwrap();
        let r = unicycle_quadratic(g, bc, &t, &theta).unwrap();
        assert!(r.diff() < 1e-9);
        let lk = enumerate(g, bc, Kind::Unicycle).unwrap().total / enumerate(g, bc, Kind::Tree).unwrap().total;
        let m = winding_second_moment(&t, &theta, lk);
        let view = NodeView::new(g, bc);
        let unis = enumerate(g, bc, Kind::Unicycle).unwrap();
        let direct = unis
            .items
            .iter()
            .map(|u| u.weight * circulation(&theta, &unicycle_cycle(g, &view, &u.edges)).powi(2))
            .sum::<f64>()
            / unis.total;
        assert!((m - direct).abs() < 1e-12 && m >= 0.0);
    }
}
