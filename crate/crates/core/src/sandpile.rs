//! Abelian sandpile with sink `∂V`: toppling, the burning test, the burning
//! bijection to spanning trees and exact probabilities of minimal
//! subconfigurations.
//!
//! Heights are stored per vertex; entries at boundary vertices must be zero.
//! Toppling thresholds are the unweighted degrees, so on weighted graphs only
//! the measure `ν`, the pullback of the weighted tree measure under the
//! bijection, carries the weights.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::dpp::{pattern_prob, DppError, Pattern};
use crate::graph::{BoundaryCondition, Edge, EdgeId, Vertex, VertexId, WeightedGraph};
use crate::green::TransferKernel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SandpileError {
    #[error("sandpile needs at least one sink (boundary) vertex")]
    NoSink,
    #[error("height vector has length {got}, graph has {want} vertices")]
    Length { got: usize, want: usize },
    #[error("boundary vertex {0} carries a nonzero height")]
    BoundaryHeight(VertexId),
    #[error("vertex {0} is not stable")]
    Unstable(VertexId),
    #[error("configuration is not recurrent")]
    NotRecurrent,
    #[error("subconfiguration is not minimal")]
    NotMinimal,
    #[error("vertex {0} is not an interior vertex of the subgraph")]
    BadSubgraph(VertexId),
    #[error("edges at the subgraph carry different conductances")]
    NonUniformWeights,
    #[error("removing the subgraph cuts vertices off from the sink")]
    SeparatesSink,
    #[error("edge set is not a spanning tree of the sink-contracted graph")]
    NotATree,
    #[error("toppling exceeded {0} steps")]
    IterationCap(u64),
    #[error("{0} stable configurations exceed the search limit")]
    TooLarge(u128),
    #[error(transparent)]
    Dpp(#[from] DppError),
}

fn check_heights(g: &WeightedGraph, h: &[u32]) -> Result<(), SandpileError> {
    if g.boundary().is_empty() {
        return Err(SandpileError::NoSink);
    }
    if h.len() != g.vertex_count() {
        return Err(SandpileError::Length { got: h.len(), want: g.vertex_count() });
    }
    if let Some(v) = (0..h.len()).find(|&v| g.is_boundary(v) && h[v] != 0) {
        return Err(SandpileError::BoundaryHeight(v));
    }
    Ok(())
}

fn check_stable(g: &WeightedGraph, h: &[u32]) -> Result<(), SandpileError> {
    check_heights(g, h)?;
    match g.interior().into_iter().find(|&v| h[v] as usize >= g.degree(v)) {
        Some(v) => Err(SandpileError::Unstable(v)),
        None => Ok(()),
    }
}

/// Result of toppling to stability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stabilized {
    pub heights: Vec<u32>,
    /// Number of topplings at each vertex.
    pub odometer: Vec<u64>,
    /// Particles that fell into the sink.
    pub lost: u64,
}

pub fn stabilize(g: &WeightedGraph, h: &[u32]) -> Result<Stabilized, SandpileError> {
    stabilize_by(g, h, u64::MAX, |_| 0)
}

/// Topples until stable; `pick` chooses which of the currently unstable
/// vertices (given in a work list) topples next. At most `cap` topplings.
pub fn stabilize_by(
    g: &WeightedGraph,
    h: &[u32],
    cap: u64,
    mut pick: impl FnMut(usize) -> usize,
) -> Result<Stabilized, SandpileError> {
    check_heights(g, h)?;
    let mut h: Vec<u64> = h.iter().map(|&x| x as u64).collect();
    let deg: Vec<u64> = (0..g.vertex_count()).map(|v| g.degree(v) as u64).collect();
    let mut odometer = vec![0u64; g.vertex_count()];
    let mut lost = 0;
    let mut queued = vec![false; g.vertex_count()];
    let mut work: Vec<VertexId> = Vec::new();
    for v in g.interior() {
        if h[v] >= deg[v] {
            queued[v] = true;
            work.push(v);
        }
    }
    let mut steps = 0u64;
    while !work.is_empty() {
        let i = pick(work.len()).min(work.len() - 1);
        let v = work.swap_remove(i);
        queued[v] = false;
        // topple as many times as possible at once; toppling commutes
        let k = h[v] / deg[v];
        if k == 0 {
            continue;
        }
        steps += k;
        if steps > cap {
            return Err(SandpileError::IterationCap(cap));
        }
        h[v] -= k * deg[v];
        odometer[v] += k;
        for &e in g.incident(v) {
            let w = g.other(e, v);
            if g.is_boundary(w) {
                lost += k;
            } else {
                h[w] += k;
                if h[w] >= deg[w] && !queued[w] {
                    queued[w] = true;
                    work.push(w);
                }
            }
        }
    }
    Ok(Stabilized { heights: h.into_iter().map(|x| x as u32).collect(), odometer, lost })
}

/// `η ⊕ δ_v`.
pub fn add_particle(g: &WeightedGraph, h: &[u32], v: VertexId) -> Result<Vec<u32>, SandpileError> {
    let mut h = h.to_vec();
    h[v] += 1;
    Ok(stabilize(g, &h)?.heights)
}

/// Outcome of the burning algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Burning {
    /// Round in which each vertex burnt (sink: 0), `None` if it never did.
    pub round: Vec<Option<u32>>,
    /// Edge to the vertex that lit each burnt interior vertex.
    pub parent: Vec<Option<EdgeId>>,
}

impl Burning {
    pub fn all_burnt(&self) -> bool {
        self.round.iter().all(Option::is_some)
    }

    pub fn tree_edges(&self) -> Vec<EdgeId> {
        let mut t: Vec<EdgeId> = self.parent.iter().flatten().copied().collect();
        t.sort_unstable();
        t
    }
}

/// Burning algorithm in rounds. Round `r` burns every unburnt `x` with
/// `h(x) ≥ deg(x) − a − b`, where `a` counts edges to vertices burnt before
/// round `r − 1` and `b` edges to vertices burnt in round `r − 1`. The parent
/// edge is the `(h(x) − deg(x) + a + b)`-th of those `b` edges in ascending id.
pub fn burn(g: &WeightedGraph, h: &[u32]) -> Result<Burning, SandpileError> {
    check_stable(g, h)?;
    let n = g.vertex_count();
    let mut round: Vec<Option<u32>> = vec![None; n];
    let mut parent = vec![None; n];
    let mut frontier: Vec<VertexId> = g.boundary();
    for &v in &frontier {
        round[v] = Some(0);
    }
    let mut seen = vec![u32::MAX; n];
    let mut r = 0u32;
    let mut last: Vec<EdgeId> = Vec::new();
    while !frontier.is_empty() {
        r += 1;
        let mut lit = Vec::new();
        for &y in &frontier {
            for &e in g.incident(y) {
                let x = g.other(e, y);
                if round[x].is_some() || seen[x] == r {
                    continue;
                }
                seen[x] = r;
                let mut a = 0;
                last.clear();
                for &f in g.incident(x) {
                    match round[g.other(f, x)] {
                        Some(q) if q + 1 == r => last.push(f),
                        Some(_) => a += 1,
                        None => {}
                    }
                }
                let threshold = g.degree(x) - a - last.len();
                let hx = h[x] as usize;
                if hx >= threshold {
                    last.sort_unstable();
                    lit.push((x, last[hx - threshold]));
                }
            }
        }
        frontier.clear();
        for (x, e) in lit {
            round[x] = Some(r);
            parent[x] = Some(e);
            frontier.push(x);
        }
    }
    Ok(Burning { round, parent })
}

/// Burning test: a stable configuration is recurrent iff every vertex burns.
pub fn is_recurrent(g: &WeightedGraph, h: &[u32]) -> Result<bool, SandpileError> {
    Ok(burn(g, h)?.all_burnt())
}

/// Spanning tree (sink contracted) of a recurrent configuration.
pub fn burning_bijection(g: &WeightedGraph, h: &[u32]) -> Result<Vec<EdgeId>, SandpileError> {
    let b = burn(g, h)?;
    if !b.all_burnt() {
        return Err(SandpileError::NotRecurrent);
    }
    Ok(b.tree_edges())
}

/// Inverse of [`burning_bijection`]: the burning round of a vertex is its
/// depth in the tree rooted at the sink, which fixes `a`, `b` and the
/// height.
pub fn config_from_tree(g: &WeightedGraph, tree: &[EdgeId]) -> Result<Vec<u32>, SandpileError> {
    if g.boundary().is_empty() {
        return Err(SandpileError::NoSink);
    }
    let n = g.vertex_count();
    let mut adj: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
    for &e in tree {
        let ed = g.edge(e);
        if g.is_boundary(ed.u) && g.is_boundary(ed.v) {
            return Err(SandpileError::NotATree);
        }
        adj[ed.u].push(e);
        adj[ed.v].push(e);
    }
    let mut depth: Vec<Option<u32>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue: VecDeque<VertexId> = g.boundary().into();
    for &v in &queue {
        depth[v] = Some(0);
    }
    while let Some(y) = queue.pop_front() {
        let d = depth[y].unwrap();
        for &e in &adj[y] {
            let x = g.other(e, y);
            if depth[x].is_none() {
                depth[x] = Some(d + 1);
                parent[x] = e;
                queue.push_back(x);
            }
        }
    }
    // connected with one edge per interior vertex: a tree once the sink is glued
    let interior = g.interior();
    if tree.len() != interior.len() || interior.iter().any(|&x| depth[x].is_none()) {
        return Err(SandpileError::NotATree);
    }
    let mut h = vec![0u32; n];
    let mut last = Vec::new();
    for &x in &interior {
        let d = depth[x].unwrap();
        let mut a = 0;
        last.clear();
        for &f in g.incident(x) {
            let q = depth[g.other(f, x)].unwrap();
            if q + 1 == d {
                last.push(f);
            } else if q + 1 < d {
                a += 1;
            }
        }
        last.sort_unstable();
        let idx = last.iter().position(|&f| f == parent[x]).expect("parent is one round earlier");
        h[x] = (g.degree(x) - a - last.len() + idx) as u32;
    }
    Ok(h)
}

/// Heights `deg − 1` everywhere except `ξ` on `W`.
pub fn maximal_extension(g: &WeightedGraph, w: &[VertexId], xi: &[u32]) -> Result<Vec<u32>, SandpileError> {
    if g.boundary().is_empty() {
        return Err(SandpileError::NoSink);
    }
    let mut h: Vec<u32> = (0..g.vertex_count())
        .map(|v| if g.is_boundary(v) { 0 } else { g.degree(v) as u32 - 1 })
        .collect();
    if w.len() != xi.len() {
        return Err(SandpileError::Length { got: xi.len(), want: w.len() });
    }
    for (i, &x) in w.iter().enumerate() {
        if x >= g.vertex_count() || g.is_boundary(x) || w[..i].contains(&x) {
            return Err(SandpileError::BadSubgraph(x));
        }
        if xi[i] as usize >= g.degree(x) {
            return Err(SandpileError::Unstable(x));
        }
        h[x] = xi[i];
    }
    Ok(h)
}

/// Part of a recurrent configuration, and no longer after lowering any one
/// height. Recurrence is monotone in the heights, so both tests use the
/// maximal extension.
pub fn is_minimal(g: &WeightedGraph, w: &[VertexId], xi: &[u32]) -> Result<bool, SandpileError> {
    if !is_recurrent(g, &maximal_extension(g, w, xi)?)? {
        return Ok(false);
    }
    for i in 0..w.len() {
        if xi[i] == 0 {
            continue;
        }
        let mut lower = xi.to_vec();
        lower[i] -= 1;
        if is_recurrent(g, &maximal_extension(g, w, &lower)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `𝒢_W`: `W` kept, every other vertex glued to one sink, self-loops of the
/// sink removed. Returns the graph (vertices `W` in order, then the sink) and
/// the original id of each of its edges.
pub fn wired_at(g: &WeightedGraph, w: &[VertexId]) -> Result<(WeightedGraph, Vec<EdgeId>), SandpileError> {
    let mut slot = vec![w.len(); g.vertex_count()];
    for (i, &x) in w.iter().enumerate() {
        if x >= g.vertex_count() || g.is_boundary(x) {
            return Err(SandpileError::BadSubgraph(x));
        }
        slot[x] = i;
    }
    let mut vs: Vec<Vertex> = w.iter().map(|&x| g.vertex(x).clone()).collect();
    let anchor = (0..g.vertex_count()).find(|&v| slot[v] == w.len()).unwrap_or(0);
    vs.push(Vertex { pos: g.vertex(anchor).pos.clone(), boundary: true });
    let mut edges = Vec::new();
    let mut ids = Vec::new();
    for (e, ed) in g.edges().iter().enumerate() {
        let (a, b) = (slot[ed.u], slot[ed.v]);
        if a == w.len() && b == w.len() {
            continue;
        }
        edges.push(Edge { u: a, v: b, c: ed.c });
        ids.push(e);
    }
    let gw = WeightedGraph::new(g.dim(), vs, edges).map_err(|_| SandpileError::BadSubgraph(w[0]))?;
    Ok((gw, ids))
}

/// Whether some vertex outside `W` reaches the sink only through `W`.
pub fn separates_sink(g: &WeightedGraph, w: &[VertexId]) -> bool {
    let mut reach = vec![false; g.vertex_count()];
    let mut stack = g.boundary();
    for &b in &stack {
        reach[b] = true;
    }
    while let Some(y) = stack.pop() {
        for &e in g.incident(y) {
            let x = g.other(e, y);
            if !reach[x] && !w.contains(&x) {
                reach[x] = true;
                stack.push(x);
            }
        }
    }
    (0..g.vertex_count()).any(|v| !reach[v] && !w.contains(&v))
}

/// Edge sets of a minimal subconfiguration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalEdges {
    /// `𝒯₀`: burning parents of `W` in the maximal extension, a spanning
    /// tree of `𝒢_W` (ids in `g`).
    pub tree: Vec<EdgeId>,
    /// `ℰ₀`: edges at `W` outside `𝒯₀`.
    pub excluded: Vec<EdgeId>,
}

pub fn minimal_edges(g: &WeightedGraph, w: &[VertexId], xi: &[u32]) -> Result<MinimalEdges, SandpileError> {
    if !is_minimal(g, w, xi)? {
        return Err(SandpileError::NotMinimal);
    }
    let b = burn(g, &maximal_extension(g, w, xi)?)?;
    let mut tree: Vec<EdgeId> = w.iter().map(|&x| b.parent[x].expect("recurrent")).collect();
    tree.sort_unstable();
    let mut excluded: Vec<EdgeId> = (0..g.edge_count())
        .filter(|&e| {
            let ed = g.edge(e);
            (w.contains(&ed.u) || w.contains(&ed.v)) && tree.binary_search(&e).is_err()
        })
        .collect();
    excluded.sort_unstable();
    Ok(MinimalEdges { tree, excluded })
}

/// `ν(η_W = ξ) = det(I − T)_{ℰ₀}`: the tree avoids every edge at `W` outside
/// `𝒯₀`. `k` is the transfer current of `g` with wired boundary.
///
/// The identity needs every vertex outside `W` to reach the sink without
/// crossing `W`, and on weighted graphs all edges at `W` to share one
/// conductance; otherwise the event is not a single minor and an error is
/// returned.
pub fn minimal_prob<K: TransferKernel + ?Sized>(
    g: &WeightedGraph,
    k: &K,
    w: &[VertexId],
    xi: &[u32],
) -> Result<f64, SandpileError> {
    let m = minimal_edges(g, w, xi)?;
    if separates_sink(g, w) {
        return Err(SandpileError::SeparatesSink);
    }
    let c0 = g.conductance(m.tree[0]);
    if m.tree.iter().chain(&m.excluded).any(|&e| g.conductance(e) != c0) {
        return Err(SandpileError::NonUniformWeights);
    }
    if m.excluded.is_empty() {
        return Ok(1.0);
    }
    Ok(pattern_prob(k, &Pattern { present: Vec::new(), absent: m.excluded })?)
}

/// Recurrent configurations found as the closed class of the
/// add-a-particle-and-stabilize chain containing the maximal stable
/// configuration. Sorted lexicographically.
pub fn chain_closure_oracle(g: &WeightedGraph, limit: u128) -> Result<Vec<Vec<u32>>, SandpileError> {
    if g.boundary().is_empty() {
        return Err(SandpileError::NoSink);
    }
    let interior = g.interior();
    let size: u128 = interior.iter().map(|&v| g.degree(v) as u128).product();
    if size > limit {
        return Err(SandpileError::TooLarge(size));
    }
    let code = |h: &[u32]| interior.iter().fold(0usize, |acc, &v| acc * g.degree(v) + h[v] as usize);
    let top = maximal_extension(g, &[], &[])?;
    let mut seen = vec![false; size as usize];
    seen[code(&top)] = true;
    let mut stack = vec![top];
    let mut out = Vec::new();
    while let Some(h) = stack.pop() {
        for &v in &interior {
            let next = add_particle(g, &h, v)?;
            let c = code(&next);
            if !seen[c] {
                seen[c] = true;
                stack.push(next);
            }
        }
        out.push(h);
    }
    out.sort();
    Ok(out)
}

/// Every stable configuration, in lexicographic order.
pub fn stable_configs(g: &WeightedGraph) -> Vec<Vec<u32>> {
    let interior = g.interior();
    let mut h = vec![0u32; g.vertex_count()];
    let mut out = Vec::new();
    loop {
        out.push(h.clone());
        let mut i = interior.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            let v = interior[i];
            h[v] += 1;
            if (h[v] as usize) < g.degree(v) {
                break;
            }
            h[v] = 0;
        }
    }
}

/// `ν(η_W = ξ)` by summing tree weights over all recurrent configurations.
pub fn oracle_event_prob(g: &WeightedGraph, recurrent: &[Vec<u32>], w: &[VertexId], xi: &[u32]) -> Result<f64, SandpileError> {
    let (mut hit, mut total) = (0.0, 0.0);
    for h in recurrent {
        let t = burning_bijection(g, h)?;
        let wt: f64 = t.iter().map(|&e| g.conductance(e)).product();
        total += wt;
        if w.iter().zip(xi).all(|(&x, &s)| h[x] == s) {
            hit += wt;
        }
    }
    Ok(hit / total)
}

/// The corpus graph with a sink: wired graphs as they are, free graphs with
/// vertex 0 turned into the sink.
pub fn with_sink(g: &WeightedGraph, bc: BoundaryCondition) -> WeightedGraph {
    match bc {
        BoundaryCondition::Wired => g.clone(),
        BoundaryCondition::Free => {
            let mut vs = g.vertices().to_vec();
            vs[0].boundary = true;
            WeightedGraph::new(g.dim(), vs, g.edges().to_vec()).expect("same edges")
        }
    }
}
