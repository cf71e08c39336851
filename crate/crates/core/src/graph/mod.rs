//! Weighted graphs with a distinguished boundary, discrete forms and the
//! operators `d`, `d*` and `Δ = d*d`.
//!
//! Vertex and edge ids are dense indices. Every edge carries a reference
//! orientation `u → v`; a [`DirectedEdge`] picks one of the two orientations.
//! Parallel edges are allowed, self-loops are not.

mod forms;
mod planar;

pub use forms::{coderivative, derivative, inner0, inner1, laplacian, OneForm, VertexFunction};
pub use planar::{planar_dual, rotation_from_embedding, trace_faces, wired_contraction, Faces, PlanarDual, WiredContraction};

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;


pub type VertexId = usize;
pub type EdgeId = usize;

/// An edge together with an orientation; `reversed == false` means `u → v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedEdge {
    pub edge: EdgeId,
    pub reversed: bool,
}

impl DirectedEdge {
    pub fn forward(edge: EdgeId) -> Self {
        DirectedEdge { edge, reversed: false }
    }

    pub fn backward(edge: EdgeId) -> Self {
        DirectedEdge { edge, reversed: true }
    }

    pub fn rev(self) -> Self {
        DirectedEdge { edge: self.edge, reversed: !self.reversed }
    }

    pub fn sign(self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub pos: Vec<f64>,
    pub boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex {vertex} has {got} coordinates, expected {dim}")]
    Dimension { vertex: VertexId, got: usize, dim: usize },
    #[error("vertex {vertex} has a non-finite coordinate")]
    BadPosition { vertex: VertexId },
    #[error("edge {edge} references missing vertex {vertex}")]
    MissingVertex { edge: EdgeId, vertex: VertexId },
    #[error("edge {edge} is a self-loop at vertex {vertex}")]
    SelfLoop { edge: EdgeId, vertex: VertexId },
    #[error("edge {edge} has conductance {c}, which is not a positive finite number")]
    BadConductance { edge: EdgeId, c: f64 },
    #[error("vertex {vertex} is not connected to vertex 0")]
    Disconnected { vertex: VertexId },
    #[error("rotation at vertex {vertex} is not a permutation of its incident edges")]
    BadRotation { vertex: VertexId },
    #[error("rotation system has genus {genus}, the graph is not embedded in the plane")]
    NotPlanar { genus: i64 },
    #[error("graph carries no rotation system or 2D positions")]
    NoEmbedding,
    #[error("boundary vertices do not share a common face")]
    BoundaryNotOnOneFace,
    #[error("{0}")]
    Invalid(&'static str),
}

/// A finite weighted graph `(V, E, c, ∂V)`.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    dim: usize,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<EdgeId>>,
    rotation: Option<Vec<Vec<EdgeId>>>,
}

impl WeightedGraph {
    /// Validates and builds a graph. Checks run in order and the first
    /// violation is reported.
    pub fn new(dim: usize, vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.pos.len() != dim {
                return Err(GraphError::Dimension { vertex: i, got: v.pos.len(), dim });
            }
            if v.pos.iter().any(|x| !x.is_finite()) {
                return Err(GraphError::BadPosition { vertex: i });
            }
        }
        let n = vertices.len();
        let mut incidence = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            for w in [e.u, e.v] {
                if w >= n {
                    return Err(GraphError::MissingVertex { edge: id, vertex: w });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop { edge: id, vertex: e.u });
            }
            if !(e.c.is_finite() && e.c > 0.0) {
                return Err(GraphError::BadConductance { edge: id, c: e.c });
            }
            incidence[e.u].push(id);
            incidence[e.v].push(id);
        }
        let g = WeightedGraph { dim, vertices, edges, incidence, rotation: None };
        if let Some(v) = g.first_unreachable() {
            return Err(GraphError::Disconnected { vertex: v });
        }
        Ok(g)
    }

    /// Attaches a rotation system: for each vertex, its incident edges in
    /// counter-clockwise order.
    pub fn with_rotation(mut self, rotation: Vec<Vec<EdgeId>>) -> Result<Self, GraphError> {
        if rotation.len() != self.vertices.len() {
            return Err(GraphError::BadRotation { vertex: rotation.len().min(self.vertices.len()) });
        }
        for (v, rot) in rotation.iter().enumerate() {
            let mut a = rot.clone();
            let mut b = self.incidence[v].clone();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(GraphError::BadRotation { vertex: v });
            }
        }
        self.rotation = Some(rotation);
        Ok(self)
    }

    fn first_unreachable(&self) -> Option<VertexId> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &e in &self.incidence[x] {
                let y = self.other(e, x);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn conductance(&self, e: EdgeId) -> f64 {
        self.edges[e].c
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.vertices[v].boundary
    }

    pub fn boundary(&self) -> Vec<VertexId> {
        (0..self.vertex_count()).filter(|&v| self.is_boundary(v)).collect()
    }

    pub fn interior(&self) -> Vec<VertexId> {
        (0..self.vertex_count()).filter(|&v| !self.is_boundary(v)).collect()
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v].len()
    }

    /// Sum of conductances at `v`.
    pub fn weighted_degree(&self, v: VertexId) -> f64 {
        self.incidence[v].iter().map(|&e| self.edges[e].c).sum()
    }

    pub fn other(&self, e: EdgeId, x: VertexId) -> VertexId {
        let ed = &self.edges[e];
        if ed.u == x {
            ed.v
        } else {
            ed.u
        }
    }

    /// `(tail, head)` of a directed edge in traversal order, i.e. `(u, v)`
    /// for the forward orientation.
    pub fn endpoints(&self, d: DirectedEdge) -> (VertexId, VertexId) {
        let e = &self.edges[d.edge];
        if d.reversed {
            (e.v, e.u)
        } else {
            (e.u, e.v)
        }
    }

    pub fn rotation(&self) -> Option<&[Vec<EdgeId>]> {
        self.rotation.as_deref()
    }

    pub fn midpoint(&self, e: EdgeId) -> Vec<f64> {
        let ed = &self.edges[e];
        self.vertices[ed.u]
            .pos
            .iter()
            .zip(&self.vertices[ed.v].pos)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Whether the edge joins two boundary vertices (irrelevant for wired
    /// boundary conditions).
    pub fn is_boundary_edge(&self, e: EdgeId) -> bool {
        let ed = &self.edges[e];
        self.is_boundary(ed.u) && self.is_boundary(ed.v)
    }

    /// Same graph, every vertex interior.
    pub fn without_boundary(&self) -> WeightedGraph {
        let mut g = self.clone();
        for v in &mut g.vertices {
            v.boundary = false;
        }
        g
    }

    /// Same graph with conductances replaced.
    pub fn with_conductances(&self, c: &[f64]) -> Result<WeightedGraph, GraphError> {
        assert_eq!(c.len(), self.edges.len());
        for (e, &x) in c.iter().enumerate() {
            if !(x.is_finite() && x > 0.0) {
                return Err(GraphError::BadConductance { edge: e, c: x });
            }
        }
        let mut g = self.clone();
        for (ed, &x) in g.edges.iter_mut().zip(c) {
            ed.c = x;
        }
        Ok(g)
    }

    /// Whether all conductances are equal (the sandpile view ignores weights).
    pub fn is_unweighted(&self) -> bool {
        self.edges.windows(2).all(|w| w[0].c == w[1].c)
    }
}

/// Boundary conditions for Green functions and spanning trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// `∂V` is glued into one root; Green functions vanish there.
    Wired,
    /// Boundary flags are ignored; Green functions are taken mean-zero.
    Free,
}

impl BoundaryCondition {
    /// Vertices that carry unknowns under this condition.
    pub fn active(self, g: &WeightedGraph) -> Vec<VertexId> {
        match self {
            BoundaryCondition::Wired => g.interior(),
            BoundaryCondition::Free => (0..g.vertex_count()).collect(),
        }
    }

    /// Whether `v` is treated as part of the root.
    pub fn is_root(self, g: &WeightedGraph, v: VertexId) -> bool {
        matches!(self, BoundaryCondition::Wired) && g.is_boundary(v)
    }

    /// Edges that can appear in a spanning tree.
    pub fn tree_edges(self, g: &WeightedGraph) -> Vec<EdgeId> {
        match self {
            BoundaryCondition::Wired => (0..g.edge_count()).filter(|&e| !g.is_boundary_edge(e)).collect(),
            BoundaryCondition::Free => (0..g.edge_count()).collect(),
        }
    }
}

/// The multigraph seen by spanning trees: under wired conditions every
/// boundary vertex is merged into one root node and boundary-boundary edges
/// disappear.
#[derive(Debug, Clone)]
pub struct NodeView {
    /// Node of each vertex.
    pub node: Vec<usize>,
    pub nodes: usize,
    /// Edges kept, in id order.
    pub edges: Vec<EdgeId>,
    /// Wired: the merged boundary (last node). Free: vertex 0.
    pub root: usize,
}

impl NodeView {
    pub fn new(g: &WeightedGraph, bc: BoundaryCondition) -> NodeView {
        let n = g.vertex_count();
        match bc {
            BoundaryCondition::Free => {
                NodeView { node: (0..n).collect(), nodes: n, edges: (0..g.edge_count()).collect(), root: 0 }
            }
            BoundaryCondition::Wired => {
                let mut node = vec![0; n];
                let mut k = 0;
                for v in 0..n {
                    if !g.is_boundary(v) {
                        node[v] = k;
                        k += 1;
                    }
                }
                let has_sink = k < n;
                for v in 0..n {
                    if g.is_boundary(v) {
                        node[v] = k;
                    }
                }
                NodeView {
                    node,
                    nodes: if has_sink { k + 1 } else { k },
                    edges: bc.tree_edges(g),
                    root: k,
                }
            }
        }
    }

    /// Nodes joined by `e`.
    pub fn ends(&self, g: &WeightedGraph, e: EdgeId) -> (usize, usize) {
        let ed = g.edge(e);
        (self.node[ed.u], self.node[ed.v])
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn triangle(c: [f64; 3]) -> WeightedGraph {
        let vs = (0..3)
            .map(|i| {
                let a = 2.0 * core::f64::consts::PI * i as f64 / 3.0;
                Vertex { pos: vec![a.cos(), a.sin()], boundary: false }
            })
            .collect();
        let es = vec![
            Edge { u: 0, v: 1, c: c[0] },
            Edge { u: 1, v: 2, c: c[1] },
            Edge { u: 2, v: 0, c: c[2] },
        ];
        WeightedGraph::new(2, vs, es).unwrap()
    }

    #[test]
    fn validation_reports_first_violation() {
        let v = |x: f64, b| Vertex { pos: vec![x, 0.0], boundary: b };
        let err = WeightedGraph::new(2, vec![v(0.0, false), v(1.0, false)], vec![Edge { u: 0, v: 2, c: 1.0 }]);
        assert_eq!(err.unwrap_err(), GraphError::MissingVertex { edge: 0, vertex: 2 });
        let err = WeightedGraph::new(2, vec![v(0.0, false), v(1.0, false)], vec![Edge { u: 0, v: 1, c: -1.0 }]);
        assert_eq!(err.unwrap_err(), GraphError::BadConductance { edge: 0, c: -1.0 });
        let err = WeightedGraph::new(2, vec![v(0.0, false), v(1.0, false), v(2.0, true)], vec![Edge { u: 0, v: 1, c: 1.0 }]);
        assert_eq!(err.unwrap_err(), GraphError::Disconnected { vertex: 2 });
        let err = WeightedGraph::new(2, vec![v(0.0, false)], vec![Edge { u: 0, v: 0, c: 1.0 }]);
        assert_eq!(err.unwrap_err(), GraphError::SelfLoop { edge: 0, vertex: 0 });
    }

    #[test]
    fn rotation_must_permute_incidence() {
        let g = triangle([1.0; 3]);
        assert!(g.clone().with_rotation(vec![vec![0, 2], vec![1, 0], vec![2, 1]]).is_ok());
        assert_eq!(
            g.with_rotation(vec![vec![0, 1], vec![1, 0], vec![2, 1]]).unwrap_err(),
            GraphError::BadRotation { vertex: 0 }
        );
    }
}
