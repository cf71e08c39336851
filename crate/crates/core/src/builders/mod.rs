//! Graph constructors: lattice points of a domain, discrete tori, isoradial
//! rhombus tilings, plus the continuum Green functions these approximate and
//! a fixed corpus of small graphs for exhaustive checks.

mod continuum;
mod corpus;
mod isoradial;

pub use continuum::{full_space_mixed, unit_sphere_area, ContinuumGreen};
pub use corpus::{corpus, CorpusGraph};
pub use isoradial::{isoradial, isoradial_torus, Isoradial, IsoradialSpec};

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;

use crate::graph::{rotation_from_embedding, BoundaryCondition, Edge, GraphError, Vertex, VertexId, WeightedGraph};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("domain contains no lattice point at resolution {0}")]
    EmptyIntersection(usize),
    #[error("invalid domain: {0}")]
    BadDomain(&'static str),
    #[error("resolution must be at least {min}, got {got}")]
    Resolution { got: usize, min: usize },
    #[error("rhombus angle {angle} gives a half-angle outside [{min}, π/2 − {min}]")]
    AngleBound { angle: f64, min: f64 },
    #[error("ball of radius {0} reaches the boundary")]
    BallExits(usize),
    #[error("unsupported domain for this operation")]
    Unsupported,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Open domain `D ⊂ ℝᵈ`.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    /// Axis-parallel box `∏ (lo_k, hi_k)`.
    Rectangle { lo: Vec<f64>, hi: Vec<f64> },
    /// Planar disk.
    Disk { center: [f64; 2], radius: f64 },
    /// All of `ℝᵈ`.
    FullSpace { dim: usize },
}

impl DomainSpec {
    pub fn unit_square() -> Self {
        DomainSpec::Rectangle { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] }
    }

    pub fn unit_cube(dim: usize) -> Self {
        DomainSpec::Rectangle { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Rectangle { lo, .. } => lo.len(),
            DomainSpec::Disk { .. } => 2,
            DomainSpec::FullSpace { dim } => *dim,
        }
    }

    pub fn validate(&self) -> Result<(), BuildError> {
        match self {
            DomainSpec::Rectangle { lo, hi } => {
                if lo.len() != hi.len() || lo.len() < 2 {
                    return Err(BuildError::BadDomain("rectangle needs matching corners in dimension ≥ 2"));
                }
                if lo.iter().zip(hi).any(|(a, b)| !(b > a) || !a.is_finite() || !b.is_finite()) {
                    return Err(BuildError::BadDomain("rectangle sides must be positive"));
                }
            }
            DomainSpec::Disk { center, radius } => {
                if !(*radius > 0.0) || !radius.is_finite() || center.iter().any(|c| !c.is_finite()) {
                    return Err(BuildError::BadDomain("disk radius must be positive"));
                }
            }
            DomainSpec::FullSpace { dim } => {
                if *dim < 2 {
                    return Err(BuildError::BadDomain("dimension must be at least 2"));
                }
            }
        }
        Ok(())
    }

    /// Whether `x` lies in the open domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        const EPS: f64 = 1e-12;
        match self {
            DomainSpec::Rectangle { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *v > a + EPS && *v < b - EPS),
            DomainSpec::Disk { center, radius } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                dx * dx + dy * dy < radius * radius * (1.0 - EPS)
            }
            DomainSpec::FullSpace { .. } => true,
        }
    }

    fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>), BuildError> {
        match self {
            DomainSpec::Rectangle { lo, hi } => Ok((lo.clone(), hi.clone())),
            DomainSpec::Disk { center, radius } => {
                Ok((vec![center[0] - radius, center[1] - radius], vec![center[0] + radius, center[1] + radius]))
            }
            DomainSpec::FullSpace { .. } => Err(BuildError::Unsupported),
        }
    }
}

/// Lattice patch `ℤᵈ/n ∩ D` with its integer coordinates.
#[derive(Debug, Clone)]
pub struct Grid {
    pub graph: WeightedGraph,
    pub n: usize,
    /// Integer coordinates `k` of each vertex (position `k/n`).
    pub lattice: Vec<Vec<i64>>,
    index: BTreeMap<Vec<i64>, VertexId>,
    /// Vertices dropped because they were not in the largest component.
    pub trimmed: usize,
}

impl Grid {
    pub fn vertex_at(&self, k: &[i64]) -> Option<VertexId> {
        self.index.get(k).copied()
    }

    /// Edge joining lattice points `k` and `k + e_dir`, if present.
    pub fn edge_at(&self, k: &[i64], dir: usize) -> Option<usize> {
        let a = self.vertex_at(k)?;
        let mut k2 = k.to_vec();
        k2[dir] += 1;
        let b = self.vertex_at(&k2)?;
        self.graph.incident(a).iter().copied().find(|&e| {
            let ed = self.graph.edge(e);
            ed.u == a && ed.v == b
        })
    }
}

fn lattice_range(lo: f64, hi: f64, n: usize) -> (i64, i64) {
    let nf = n as f64;
    ((lo * nf).floor() as i64 - 1, (hi * nf).ceil() as i64 + 1)
}

/// Lattice points `k/n` strictly inside `D`, unit conductances. Under wired
/// conditions the lattice points outside `D` adjacent to an inside point are
/// added as `∂V` (for boxes they sit on `∂D`); edges between two of them are
/// not generated. Under free conditions only the largest component is kept.
/// The plane gets a rotation system read off the positions.
pub fn grid_in_domain(spec: &DomainSpec, n: usize, bc: BoundaryCondition) -> Result<Grid, BuildError> {
    spec.validate()?;
    if n < 1 {
        return Err(BuildError::Resolution { got: n, min: 1 });
    }
    let d = spec.dim();
    let (lo, hi) = spec.bounding_box()?;
    let ranges: Vec<(i64, i64)> = lo.iter().zip(&hi).map(|(&a, &b)| lattice_range(a, b, n)).collect();
    let nf = n as f64;
    let pos = |k: &[i64]| k.iter().map(|&x| x as f64 / nf).collect::<Vec<f64>>();

    let mut inside: BTreeMap<Vec<i64>, ()> = BTreeMap::new();
    let mut k: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    'outer: loop {
        if spec.contains(&pos(&k)) {
            inside.insert(k.clone(), ());
        }
        for i in 0..d {
            k[i] += 1;
            if k[i] <= ranges[i].1 {
                continue 'outer;
            }
            k[i] = ranges[i].0;
        }
        break;
    }
    if inside.is_empty() {
        return Err(BuildError::EmptyIntersection(n));
    }

    // largest component of the inside points
    let pts: Vec<Vec<i64>> = inside.keys().cloned().collect();
    let mut comp = BTreeMap::new();
    let mut best: (usize, usize) = (0, 0);
    let mut cid = 0;
    for p in &pts {
        if comp.contains_key(p) {
            continue;
        }
        let mut size = 0;
        let mut q = VecDeque::from([p.clone()]);
        comp.insert(p.clone(), cid);
        while let Some(x) = q.pop_front() {
            size += 1;
            for i in 0..d {
                for s in [-1, 1] {
                    let mut y = x.clone();
                    y[i] += s;
                    if inside.contains_key(&y) && !comp.contains_key(&y) {
                        comp.insert(y.clone(), cid);
                        q.push_back(y);
                    }
                }
            }
        }
        if size > best.1 {
            best = (cid, size);
        }
        cid += 1;
    }
    let kept: Vec<Vec<i64>> = pts.iter().filter(|p| comp[*p] == best.0).cloned().collect();
    let trimmed = pts.len() - kept.len();

    let mut index: BTreeMap<Vec<i64>, VertexId> = BTreeMap::new();
    let mut lattice = Vec::new();
    let mut vertices = Vec::new();
    for p in &kept {
        index.insert(p.clone(), vertices.len());
        vertices.push(Vertex { pos: pos(p), boundary: false });
        lattice.push(p.clone());
    }
    if bc == BoundaryCondition::Wired {
        for p in &kept {
            for i in 0..d {
                for s in [-1, 1] {
                    let mut y = p.clone();
                    y[i] += s;
                    if !inside.contains_key(&y) && !index.contains_key(&y) {
                        index.insert(y.clone(), vertices.len());
                        vertices.push(Vertex { pos: pos(&y), boundary: true });
                        lattice.push(y);
                    }
                }
            }
        }
    }
    let mut edges = Vec::new();
    for (a, p) in lattice.iter().enumerate() {
        for i in 0..d {
            let mut y = p.clone();
            y[i] += 1;
            if let Some(&b) = index.get(&y) {
                if vertices[a].boundary && vertices[b].boundary {
                    continue;
                }
                edges.push(Edge { u: a, v: b, c: 1.0 });
            }
        }
    }
    let mut graph = WeightedGraph::new(d, vertices, edges)?;
    if d == 2 {
        let rot = rotation_from_embedding(&graph)?;
        graph = graph.with_rotation(rot)?;
    }
    Ok(Grid { graph, n, lattice, index, trimmed })
}

/// `(ℤ/n)ᵈ` with unit conductances and no boundary. Vertex `Σ i_k nᵏ` sits at
/// `i/n`; edge `d·x + k` joins `x` to `x + e_k`.
pub fn torus(n: usize, d: usize) -> Result<WeightedGraph, BuildError> {
    if n < 2 {
        return Err(BuildError::Resolution { got: n, min: 2 });
    }
    if d < 1 {
        return Err(BuildError::BadDomain("dimension must be at least 1"));
    }
    let count = n.pow(d as u32);
    let coords = |mut x: usize| {
        let mut c = vec![0usize; d];
        for ck in c.iter_mut() {
            *ck = x % n;
            x /= n;
        }
        c
    };
    let vertices = (0..count)
        .map(|x| Vertex { pos: coords(x).iter().map(|&i| i as f64 / n as f64).collect(), boundary: false })
        .collect();
    let mut edges = Vec::with_capacity(count * d);
    for x in 0..count {
        let c = coords(x);
        let mut stride = 1;
        for k in 0..d {
            let y = if c[k] + 1 == n { x + stride - n * stride } else { x + stride };
            edges.push(Edge { u: x, v: y, c: 1.0 });
            stride *= n;
        }
    }
    Ok(WeightedGraph::new(d, vertices, edges)?)
}

/// Torus vertex id of the integer point `c` (coordinates taken mod `n`).
pub fn torus_vertex(n: usize, c: &[i64]) -> VertexId {
    let mut x = 0;
    let mut stride = 1;
    for &ck in c {
        x += (ck.rem_euclid(n as i64) as usize) * stride;
        stride *= n;
    }
    x
}

/// Torus edge from `c` to `c + e_dir`.
pub fn torus_edge(n: usize, d: usize, c: &[i64], dir: usize) -> usize {
    torus_vertex(n, c) * d + dir
}

/// `r · |f(v) − mean of f over the graph ball B(v, r)|`, where `B(v, r)` is
/// the set of vertices within `r` steps. Fails if the ball contains a
/// boundary vertex.
pub fn mean_value_defect(g: &WeightedGraph, f: &[f64], v: VertexId, r: usize) -> Result<f64, BuildError> {
    let mut dist = vec![usize::MAX; g.vertex_count()];
    dist[v] = 0;
    let mut q = VecDeque::from([v]);
    let mut ball = Vec::new();
    while let Some(x) = q.pop_front() {
        if g.is_boundary(x) {
            return Err(BuildError::BallExits(r));
        }
        ball.push(x);
        if dist[x] == r {
            continue;
        }
        for &e in g.incident(x) {
            let y = g.other(e, x);
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                q.push_back(y);
            }
        }
    }
    let mean = ball.iter().map(|&x| f[x]).sum::<f64>() / ball.len() as f64;
    Ok(r as f64 * (f[v] - mean).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian, planar_dual, VertexFunction};
    use crate::green::{green, transfer_current, TransferKernel};

    #[test]
    fn unit_square_counts() {
        let g = grid_in_domain(&DomainSpec::unit_square(), 4, BoundaryCondition::Free).unwrap();
        assert_eq!(g.graph.vertex_count(), 9);
        assert_eq!(g.graph.edge_count(), 12);
        let g = grid_in_domain(&DomainSpec::unit_square(), 2, BoundaryCondition::Free).unwrap();
        assert_eq!(g.graph.vertex_count(), 1);
        let g = grid_in_domain(&DomainSpec::unit_cube(3), 4, BoundaryCondition::Free).unwrap();
        assert_eq!(g.graph.vertex_count(), 27);
        assert_eq!(
            grid_in_domain(&DomainSpec::unit_square(), 1, BoundaryCondition::Free).unwrap_err(),
            BuildError::EmptyIntersection(1)
        );
    }

    #[test]
    fn wired_square_has_full_degree_inside() {
        let g = grid_in_domain(&DomainSpec::unit_square(), 5, BoundaryCondition::Wired).unwrap();
        for v in 0..g.graph.vertex_count() {
            if !g.graph.is_boundary(v) {
                assert_eq!(g.graph.degree(v), 4);
            } else {
                let p = &g.graph.vertex(v).pos;
                assert!(p.iter().any(|&x| x == 0.0 || x == 1.0));
            }
        }
        assert_eq!(g.graph.boundary().len(), 16);
    }

    #[test]
    fn disk_grid_is_connected_and_wired() {
        let spec = DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 };
        let g = grid_in_domain(&spec, 6, BoundaryCondition::Wired).unwrap();
        assert_eq!(g.trimmed, 0);
        for v in g.graph.boundary() {
            assert!(!spec.contains(&g.graph.vertex(v).pos));
        }
    }

    #[test]
    fn grid_dual_face_count() {
        // 4×4 vertices: 9 bounded faces plus the outer one
        let g = grid_in_domain(&DomainSpec::unit_square(), 5, BoundaryCondition::Free).unwrap();
        let d = planar_dual(&g.graph).unwrap();
        assert_eq!(d.graph.vertex_count(), 10);
        let dd = planar_dual(&d.graph).unwrap();
        assert_eq!(dd.graph.vertex_count(), g.graph.vertex_count());
        for e in 0..g.graph.edge_count() {
            assert!((dd.graph.conductance(e) - g.graph.conductance(e)).abs() < 1e-15);
        }
    }

    #[test]
    fn torus_counts_and_diagonal() {
        let g = torus(3, 2).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (9, 18));
        let g = torus(4, 2).unwrap();
        let t = transfer_current(&g, BoundaryCondition::Free).unwrap();
        let want = 15.0 / 32.0;
        for e in 0..g.edge_count() {
            assert!((t.t(e, e) - want).abs() < 1e-12);
        }
        // translation invariance
        let a = t.t(torus_edge(4, 2, &[0, 0], 0), torus_edge(4, 2, &[1, 2], 1));
        let b = t.t(torus_edge(4, 2, &[2, 1], 0), torus_edge(4, 2, &[3, 3], 1));
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn linear_function_is_harmonic_inside() {
        let g = grid_in_domain(&DomainSpec::unit_square(), 6, BoundaryCondition::Wired).unwrap();
        let f = VertexFunction(g.graph.vertices().iter().map(|v| v.pos[0]).collect());
        let l = laplacian(&g.graph, &f);
        for v in g.graph.interior() {
            assert!(l.0[v].abs() < 1e-12);
        }
        let c = g.vertex_at(&[3, 3]).unwrap();
        assert!(mean_value_defect(&g.graph, &f.0, c, 2).unwrap() < 1e-12);
        assert_eq!(mean_value_defect(&g.graph, &f.0, c, 3).unwrap_err(), BuildError::BallExits(3));
    }

    #[test]
    fn green_column_mean_value_defect_stays_bounded() {
        let g = grid_in_domain(&DomainSpec::unit_square(), 40, BoundaryCondition::Wired).unwrap();
        let gr = green(&g.graph, BoundaryCondition::Wired).unwrap();
        let pole = g.vertex_at(&[10, 20]).unwrap();
        let col = gr.column(pole);
        let v = g.vertex_at(&[24, 20]).unwrap();
        let d: Vec<f64> = (1..6).map(|r| mean_value_defect(&g.graph, &col, v, r).unwrap()).collect();
        assert!(d.iter().all(|&x| x < 0.1), "{d:?}");
    }
}
