//! Exhaustive enumeration of spanning trees, two-component spanning forests
//! and spanning unicycles on small graphs.
//!
//! Everything is enumerated on the [`NodeView`] of the graph, so wired
//! boundaries count as a single root node. Enumeration is an include/exclude
//! recursion over edges (contraction/deletion) with a union-find carried along
//! and pruned by the number of edges still needed.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{BoundaryCondition, DirectedEdge, EdgeId, NodeView, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Tree,
    TwoForest,
    Unicycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("graph has {edges} edges, enumeration limit is {limit}")]
    TooLarge { edges: usize, limit: usize },
    #[error("wired boundary condition on a graph without boundary vertices")]
    NoBoundary,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_edges: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_edges: 14 }
    }
}

/// One enumerated subgraph with its weight `∏ c(e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub edges: Vec<EdgeId>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    pub kind: Kind,
    pub bc: BoundaryCondition,
    /// Sorted by edge set (lexicographic), no duplicates.
    pub items: Vec<Item>,
    pub total: f64,
}

pub fn enumerate(g: &WeightedGraph, bc: BoundaryCondition, kind: Kind) -> Result<Enumeration, OracleError> {
    enumerate_with(g, bc, kind, OracleLimits::default())
}

pub fn enumerate_with(
    g: &WeightedGraph,
    bc: BoundaryCondition,
    kind: Kind,
    limits: OracleLimits,
) -> Result<Enumeration, OracleError> {
    if bc == BoundaryCondition::Wired && g.boundary().is_empty() {
        return Err(OracleError::NoBoundary);
    }
    let view = NodeView::new(g, bc);
    if view.edges.len() > limits.max_edges {
        return Err(OracleError::TooLarge { edges: view.edges.len(), limit: limits.max_edges });
    }
    let (need, cycles) = match kind {
        Kind::Tree => (view.nodes - 1, 0),
        Kind::TwoForest => (view.nodes.saturating_sub(2), 0),
        Kind::Unicycle => (view.nodes, 1),
    };
    let ends: Vec<(usize, usize)> = view.edges.iter().map(|&e| view.ends(g, e)).collect();
    let mut search = Search { g, view: &view, ends: &ends, need, cycles, chosen: Vec::new(), items: Vec::new() };
    if kind != Kind::TwoForest || view.nodes >= 2 {
        search.run(0, (0..view.nodes).collect(), 0);
    }
    let items = search.items;
    let total = items.iter().map(|i| i.weight).sum();
    Ok(Enumeration { kind, bc, items, total })
}

struct Search<'a> {
    g: &'a WeightedGraph,
    view: &'a NodeView,
    ends: &'a [(usize, usize)],
    need: usize,
    cycles: usize,
    chosen: Vec<EdgeId>,
    items: Vec<Item>,
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

impl Search<'_> {
    fn run(&mut self, i: usize, uf: Vec<usize>, cycles_used: usize) {
        if self.chosen.len() == self.need {
            if cycles_used == self.cycles {
                let weight = self.chosen.iter().map(|&e| self.g.conductance(e)).product();
                self.items.push(Item { edges: self.chosen.clone(), weight });
            }
            return;
        }
        if i == self.ends.len() || self.chosen.len() + (self.ends.len() - i) < self.need {
            return;
        }
        // include edge i
        let (a, b) = self.ends[i];
        let mut inc = uf.clone();
        let (ra, rb) = (find(&mut inc, a), find(&mut inc, b));
        let closes = ra == rb;
        if !closes || cycles_used < self.cycles {
            if !closes {
                inc[ra] = rb;
            }
            self.chosen.push(self.view.edges[i]);
            self.run(i + 1, inc, cycles_used + closes as usize);
            self.chosen.pop();
        }
        // exclude edge i
        self.run(i + 1, uf, cycles_used);
    }
}

impl Enumeration {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Weighted fraction of items satisfying `pred`.
    pub fn event_prob(&self, pred: impl Fn(&[EdgeId]) -> bool) -> f64 {
        self.event_weight(pred) / self.total
    }

    /// Total weight of items satisfying `pred`.
    pub fn event_weight(&self, pred: impl Fn(&[EdgeId]) -> bool) -> f64 {
        self.items.iter().filter(|it| pred(&it.edges)).map(|it| it.weight).sum()
    }
}

/// Component labels of the node view under the given edge set.
pub fn components(g: &WeightedGraph, view: &NodeView, edges: &[EdgeId]) -> Vec<usize> {
    let mut p: Vec<usize> = (0..view.nodes).collect();
    for &e in edges {
        let (a, b) = view.ends(g, e);
        let (ra, rb) = (find(&mut p, a), find(&mut p, b));
        p[ra] = rb;
    }
    (0..view.nodes).map(|x| find(&mut p, x)).collect()
}

/// The cycle of a unicycle, as a closed walk of directed edges. Orientation:
/// the lowest edge id on the cycle is traversed forward.
pub fn unicycle_cycle(g: &WeightedGraph, view: &NodeView, edges: &[EdgeId]) -> Vec<DirectedEdge> {
    let mut deg = vec![0usize; view.nodes];
    let mut alive: Vec<bool> = vec![true; edges.len()];
    for &e in edges {
        let (a, b) = view.ends(g, e);
        deg[a] += 1;
        deg[b] += 1;
    }
    // strip leaves until only the cycle remains
    loop {
        let mut changed = false;
        for (k, &e) in edges.iter().enumerate() {
            if !alive[k] {
                continue;
            }
            let (a, b) = view.ends(g, e);
            if deg[a] == 1 || deg[b] == 1 {
                alive[k] = false;
                deg[a] -= 1;
                deg[b] -= 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let cyc: Vec<EdgeId> = edges.iter().zip(&alive).filter(|(_, &a)| a).map(|(&e, _)| e).collect();
    let Some(&first) = cyc.iter().min() else {
        return Vec::new();
    };
    let mut walk = vec![DirectedEdge::forward(first)];
    let (start, mut at) = view.ends(g, first);
    let mut used = vec![false; cyc.len()];
    used[cyc.iter().position(|&e| e == first).unwrap()] = true;
    while at != start || walk.len() < cyc.len() {
        let Some(k) = (0..cyc.len()).find(|&k| {
            let (a, b) = view.ends(g, cyc[k]);
            !used[k] && (a == at || b == at)
        }) else {
            break;
        };
        used[k] = true;
        let (a, b) = view.ends(g, cyc[k]);
        if a == at {
            walk.push(DirectedEdge::forward(cyc[k]));
            at = b;
        } else {
            walk.push(DirectedEdge::backward(cyc[k]));
            at = a;
        }
    }
    walk
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::triangle;
    use crate::graph::{Edge, Vertex};

    fn square() -> WeightedGraph {
        let v = |x: f64, y: f64| Vertex { pos: vec![x, y], boundary: false };
        WeightedGraph::new(
            2,
            vec![v(0.0, 0.0), v(1.0, 0.0), v(1.0, 1.0), v(0.0, 1.0)],
            (0..4).map(|i| Edge { u: i, v: (i + 1) % 4, c: 1.0 }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn triangle_counts() {
        let g = triangle([1.0; 3]);
        let bc = BoundaryCondition::Free;
        assert_eq!(enumerate(&g, bc, Kind::Tree).unwrap().len(), 3);
        assert_eq!(enumerate(&g, bc, Kind::Unicycle).unwrap().len(), 1);
        let f = enumerate(&g, bc, Kind::TwoForest).unwrap();
        assert_eq!(f.len(), 3);
        assert!(f.items.iter().all(|i| i.edges.len() == 1));
        let t = enumerate(&g, bc, Kind::Tree).unwrap();
        assert!((t.event_prob(|s| s.contains(&0)) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(t.event_prob(|s| s.len() == 3), 0.0);
    }

    #[test]
    fn weighted_tree_total() {
        let g = triangle([1.0, 1.0, 2.0]);
        let t = enumerate(&g, BoundaryCondition::Free, Kind::Tree).unwrap();
        assert!((t.total - 5.0).abs() < 1e-15);
    }

    #[test]
    fn square_counts_and_cycle() {
        let g = square();
        let bc = BoundaryCondition::Free;
        assert_eq!(enumerate(&g, bc, Kind::Tree).unwrap().len(), 4);
        let u = enumerate(&g, bc, Kind::Unicycle).unwrap();
        assert_eq!(u.len(), 1);
        let view = NodeView::new(&g, bc);
        let cyc = unicycle_cycle(&g, &view, &u.items[0].edges);
        assert_eq!(cyc.len(), 4);
        assert!(cyc.iter().all(|d| !d.reversed));
    }

    #[test]
    fn single_edge() {
        let v = |x: f64| Vertex { pos: vec![x], boundary: false };
        let g = WeightedGraph::new(1, vec![v(0.0), v(1.0)], vec![Edge { u: 0, v: 1, c: 1.0 }]).unwrap();
        assert_eq!(enumerate(&g, BoundaryCondition::Free, Kind::Tree).unwrap().len(), 1);
        assert_eq!(enumerate(&g, BoundaryCondition::Free, Kind::Unicycle).unwrap().len(), 0);
    }

    #[test]
    fn size_cap() {
        let g = triangle([1.0; 3]);
        let err = enumerate_with(&g, BoundaryCondition::Free, Kind::Tree, OracleLimits { max_edges: 2 });
        assert_eq!(err.unwrap_err(), OracleError::TooLarge { edges: 3, limit: 2 });
    }
}
