//! Rotation systems, face tracing and planar duals.
//!
//! A dart is a directed edge; faces are traced keeping the face on the left
//! of each dart, so for a counter-clockwise rotation system inner faces come
//! out counter-clockwise. The dual edge `e*` runs from the face on the right
//! of `e` to the face on its left, which gives `e ∧ e* > 0`.

use alloc::vec;
use alloc::vec::Vec;


use super::{DirectedEdge, Edge, EdgeId, GraphError, Vertex, VertexId, WeightedGraph};
#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;

#[inline]
fn dart(d: DirectedEdge) -> usize {
    2 * d.edge + d.reversed as usize
}

#[inline]
fn undart(i: usize) -> DirectedEdge {
    DirectedEdge { edge: i / 2, reversed: i % 2 == 1 }
}

/// Counter-clockwise rotation system read off 2D vertex positions.
pub fn rotation_from_embedding(g: &WeightedGraph) -> Result<Vec<Vec<EdgeId>>, GraphError> {
    if g.dim() != 2 {
        return Err(GraphError::NoEmbedding);
    }
    Ok((0..g.vertex_count())
        .map(|v| {
            let p = &g.vertex(v).pos;
            let mut inc: Vec<(f64, EdgeId)> = g
                .incident(v)
                .iter()
                .map(|&e| {
                    let q = &g.vertex(g.other(e, v)).pos;
                    ((q[1] - p[1]).atan2(q[0] - p[0]), e)
                })
                .collect();
            inc.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            inc.into_iter().map(|x| x.1).collect()
        })
        .collect())
}

/// Faces of a rotation system.
#[derive(Debug, Clone)]
pub struct Faces {
    /// Face index of each dart (`2e` forward, `2e+1` reversed).
    pub dart_face: Vec<usize>,
    /// Dart sequence of each face.
    pub faces: Vec<Vec<DirectedEdge>>,
}

impl Faces {
    pub fn left_of(&self, d: DirectedEdge) -> usize {
        self.dart_face[dart(d)]
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }
}

fn trace_raw(edges: &[(VertexId, VertexId)], active: &[bool], rot: &[Vec<EdgeId>]) -> Faces {
    let m = edges.len();
    let head = |i: usize| if i % 2 == 0 { edges[i / 2].1 } else { edges[i / 2].0 };
    // Position of each outgoing dart in the rotation of its tail.
    let mut pos = vec![usize::MAX; 2 * m];
    for (v, r) in rot.iter().enumerate() {
        for (k, &e) in r.iter().enumerate() {
            let d = if edges[e].0 == v { 2 * e } else { 2 * e + 1 };
            pos[d] = k;
        }
    }
    let next = |i: usize| {
        let v = head(i);
        let back = i ^ 1; // dart v -> tail(i)
        let r = &rot[v];
        let k = pos[back];
        let e = r[(k + r.len() - 1) % r.len()];
        if edges[e].0 == v {
            2 * e
        } else {
            2 * e + 1
        }
    };
    let mut dart_face = vec![usize::MAX; 2 * m];
    let mut faces = Vec::new();
    for start in 0..2 * m {
        if !active[start / 2] || dart_face[start] != usize::MAX {
            continue;
        }
        let f = faces.len();
        let mut walk = Vec::new();
        let mut i = start;
        loop {
            dart_face[i] = f;
            walk.push(undart(i));
            i = next(i);
            if i == start {
                break;
            }
        }
        faces.push(walk);
    }
    Faces { dart_face, faces }
}

/// Traces the faces of `g` using its rotation system (or its 2D embedding).
pub fn trace_faces(g: &WeightedGraph) -> Result<Faces, GraphError> {
    let rot = match g.rotation() {
        Some(r) => r.to_vec(),
        None => rotation_from_embedding(g)?,
    };
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    Ok(trace_raw(&edges, &vec![true; edges.len()], &rot))
}

fn signed_area(g: &WeightedGraph, face: &[DirectedEdge]) -> f64 {
    let mut a = 0.0;
    for &d in face {
        let (x, y) = g.endpoints(d);
        let p = &g.vertex(x).pos;
        let q = &g.vertex(y).pos;
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

/// A planar graph's dual with reciprocal conductances.
#[derive(Debug, Clone)]
pub struct PlanarDual {
    /// Dual graph; dual edge `i` crosses primal edge `i`. No boundary flags.
    pub graph: WeightedGraph,
    pub faces: Faces,
    pub outer_face: usize,
}

/// Builds the planar dual. Fails on non-planar rotation systems and on
/// bridges (whose duals would be loops).
pub fn planar_dual(g: &WeightedGraph) -> Result<PlanarDual, GraphError> {
    let faces = trace_faces(g)?;
    let genus2 = 2 - (g.vertex_count() as i64 - g.edge_count() as i64 + faces.len() as i64);
    if genus2 != 0 {
        return Err(GraphError::NotPlanar { genus: genus2 / 2 });
    }
    let nf = faces.len();
    let outer_face = if g.dim() == 2 {
        (0..nf)
            .min_by(|&a, &b| {
                signed_area(g, &faces.faces[a])
                    .partial_cmp(&signed_area(g, &faces.faces[b]))
                    .unwrap()
            })
            .unwrap()
    } else {
        (0..nf).max_by_key(|&f| faces.faces[f].len()).unwrap()
    };

    let mut edges = Vec::with_capacity(g.edge_count());
    for e in 0..g.edge_count() {
        let left = faces.left_of(DirectedEdge::forward(e));
        let right = faces.left_of(DirectedEdge::backward(e));
        if left == right {
            return Err(GraphError::Invalid("bridge edge: its dual would be a loop"));
        }
        edges.push(Edge { u: right, v: left, c: 1.0 / g.conductance(e) });
    }

    let dim = g.dim().max(2);
    let mut verts = Vec::with_capacity(nf);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in g.vertices() {
        lo = lo.min(v.pos.get(1).copied().unwrap_or(0.0));
        hi = hi.max(v.pos.get(1).copied().unwrap_or(0.0));
    }
    for (f, walk) in faces.faces.iter().enumerate() {
        let mut p = vec![0.0; dim];
        for &d in walk {
            let (x, _) = g.endpoints(d);
            for (k, c) in g.vertex(x).pos.iter().enumerate().take(dim) {
                p[k] += c / walk.len() as f64;
            }
        }
        if f == outer_face {
            p[1] = hi + (hi - lo).max(1.0);
        }
        verts.push(Vertex { pos: p, boundary: false });
    }
    let rotation: Vec<Vec<EdgeId>> = faces.faces.iter().map(|w| w.iter().map(|d| d.edge).collect()).collect();
    let graph = WeightedGraph::new(dim, verts, edges)?.with_rotation(rotation)?;
    Ok(PlanarDual { graph, faces, outer_face })
}

/// The wired graph `G/∂V` as an explicit planar graph with a free boundary.
#[derive(Debug, Clone)]
pub struct WiredContraction {
    pub graph: WeightedGraph,
    /// Vertex of the contracted graph for each original vertex.
    pub vertex_map: Vec<VertexId>,
    /// Edge of the contracted graph for each original edge; `None` for
    /// edges joining two boundary vertices.
    pub edge_map: Vec<Option<EdgeId>>,
    pub sink: VertexId,
}

/// Glues `∂V` into a single vertex placed in the face that carries the
/// boundary, keeping the embedding planar. Boundary-to-boundary edges are
/// dropped (they would become loops).
pub fn wired_contraction(g: &WeightedGraph) -> Result<WiredContraction, GraphError> {
    let boundary = g.boundary();
    if boundary.is_empty() {
        return Err(GraphError::Invalid("wired contraction needs a boundary"));
    }
    let rot_full = match g.rotation() {
        Some(r) => r.to_vec(),
        None => rotation_from_embedding(g)?,
    };
    let keep: Vec<bool> = (0..g.edge_count()).map(|e| !g.is_boundary_edge(e)).collect();
    let rot: Vec<Vec<EdgeId>> = rot_full
        .iter()
        .map(|r| r.iter().copied().filter(|&e| keep[e]).collect())
        .collect();
    let raw: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    let faces = trace_raw(&raw, &keep, &rot);

    // Face holding every boundary vertex that still has edges.
    let needed: Vec<VertexId> = boundary.iter().copied().filter(|&b| !rot[b].is_empty()).collect();
    let mut chosen: Option<usize> = None;
    for (f, walk) in faces.faces.iter().enumerate() {
        let heads: Vec<VertexId> = walk.iter().map(|&d| g.endpoints(d).1).collect();
        if needed.iter().all(|b| heads.contains(b)) {
            let better = match chosen {
                None => true,
                Some(c) => g.dim() == 2 && signed_area(g, walk) < signed_area(g, &faces.faces[c]),
            };
            if better {
                chosen = Some(f);
            }
        }
    }
    let face = chosen.ok_or(GraphError::BoundaryNotOnOneFace)?;

    let mut vertex_map = vec![usize::MAX; g.vertex_count()];
    let mut verts = Vec::new();
    for v in 0..g.vertex_count() {
        if !g.is_boundary(v) {
            vertex_map[v] = verts.len();
            verts.push(Vertex { pos: g.vertex(v).pos.clone(), boundary: false });
        }
    }
    let sink = verts.len();
    let mut centroid = vec![0.0; g.dim()];
    for &b in &boundary {
        for (k, c) in g.vertex(b).pos.iter().enumerate() {
            centroid[k] += c / boundary.len() as f64;
        }
    }
    verts.push(Vertex { pos: centroid, boundary: false });
    for &b in &boundary {
        vertex_map[b] = sink;
    }

    let mut edge_map = vec![None; g.edge_count()];
    let mut edges = Vec::new();
    for (e, ed) in g.edges().iter().enumerate() {
        if keep[e] {
            edge_map[e] = Some(edges.len());
            edges.push(Edge { u: vertex_map[ed.u], v: vertex_map[ed.v], c: ed.c });
        }
    }

    let mut rotation: Vec<Vec<EdgeId>> = vec![Vec::new(); verts.len()];
    for v in 0..g.vertex_count() {
        if !g.is_boundary(v) {
            rotation[vertex_map[v]] = rot[v].iter().map(|&e| edge_map[e].unwrap()).collect();
        }
    }
    let mut done = vec![false; g.vertex_count()];
    for &d in &faces.faces[face] {
        let (_, b) = g.endpoints(d);
        if !g.is_boundary(b) || done[b] {
            continue;
        }
        done[b] = true;
        let r = &rot[b];
        let k = r.iter().position(|&e| e == d.edge).unwrap();
        for i in 0..r.len() {
            rotation[sink].push(edge_map[r[(k + i) % r.len()]].unwrap());
        }
    }
    let graph = WeightedGraph::new(g.dim(), verts, edges)?.with_rotation(rotation)?;
    let nf = trace_faces(&graph)?.len() as i64;
    let euler = graph.vertex_count() as i64 - graph.edge_count() as i64 + nf;
    if euler != 2 {
        return Err(GraphError::NotPlanar { genus: (2 - euler) / 2 });
    }
    Ok(WiredContraction { graph, vertex_map, edge_map, sink })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::triangle;

    #[test]
    fn triangle_dual_is_three_parallel_edges() {
        let g = triangle([1.0, 2.0, 4.0]);
        let d = planar_dual(&g).unwrap();
        assert_eq!(d.graph.vertex_count(), 2);
        assert_eq!(d.graph.edge_count(), 3);
        for e in 0..3 {
            let de = d.graph.edge(e);
            // every dual edge points from the outer face into the inner one
            assert_eq!(de.u, d.outer_face);
            assert!((de.c - 1.0 / g.conductance(e)).abs() < 1e-15);
        }
    }

    #[test]
    fn dual_edge_points_to_the_left_face() {
        let g = triangle([1.0; 3]);
        let d = planar_dual(&g).unwrap();
        for e in 0..3 {
            let ed = g.edge(e);
            let (p, q) = (&g.vertex(ed.u).pos, &g.vertex(ed.v).pos);
            let head = &d.graph.vertex(d.graph.edge(e).v).pos;
            let m = g.midpoint(e);
            let wedge = (q[0] - p[0]) * (head[1] - m[1]) - (q[1] - p[1]) * (head[0] - m[0]);
            assert!(wedge > 0.0);
        }
    }
}
