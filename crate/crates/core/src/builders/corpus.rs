use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;

use super::{grid_in_domain, DomainSpec};
use crate::graph::{rotation_from_embedding, BoundaryCondition, Edge, Vertex, WeightedGraph};

/// A named small graph for exhaustive checks.
#[derive(Debug, Clone)]
pub struct CorpusGraph {
    pub name: &'static str,
    pub graph: WeightedGraph,
    pub bc: BoundaryCondition,
    /// Carries a rotation system of a planar embedding without bridges.
    pub planar: bool,
}

fn build(pos: &[[f64; 2]], boundary: &[usize], edges: &[(usize, usize, f64)]) -> WeightedGraph {
    let vs = pos
        .iter()
        .enumerate()
        .map(|(i, p)| Vertex { pos: p.to_vec(), boundary: boundary.contains(&i) })
        .collect();
    let es = edges.iter().map(|&(u, v, c)| Edge { u, v, c }).collect();
    WeightedGraph::new(2, vs, es).expect("corpus graph is valid")
}

fn embedded(g: WeightedGraph) -> WeightedGraph {
    let rot = rotation_from_embedding(&g).expect("planar position data");
    g.with_rotation(rot).expect("rotation from positions")
}

fn polygon(k: usize) -> Vec<[f64; 2]> {
    (0..k)
        .map(|i| {
            let a = 2.0 * core::f64::consts::PI * i as f64 / k as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

/// Fixed corpus: at most 14 spanning-tree edges each, mixed conductances,
/// free and wired boundaries, planar and non-planar.
pub fn corpus() -> Vec<CorpusGraph> {
    use BoundaryCondition::{Free, Wired};
    let mut out = Vec::new();
    let mut push = |name, graph, bc, planar| out.push(CorpusGraph { name, graph, bc, planar });

    let tri = polygon(3);
    push("triangle", embedded(build(&tri, &[], &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])), Free, true);
    push("triangle-weighted", embedded(build(&tri, &[], &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 2.0)])), Free, true);

    let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    push(
        "square-weighted",
        embedded(build(&sq, &[], &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0), (3, 0, 4.0)])),
        Free,
        true,
    );

    let k4 = [[0.0, 0.0], [2.0, 0.0], [1.0, 1.8], [1.0, 0.6]];
    push(
        "k4",
        embedded(build(&k4, &[], &[(0, 1, 1.0), (1, 2, 0.5), (2, 0, 2.0), (0, 3, 1.5), (1, 3, 1.0), (2, 3, 3.0)])),
        Free,
        true,
    );

    let mut wheel = vec![[0.0, 0.0]];
    wheel.extend(polygon(5));
    let mut we = Vec::new();
    for i in 0..5 {
        we.push((0, i + 1, 1.0 + 0.25 * i as f64));
        we.push((i + 1, (i + 1) % 5 + 1, 2.0 - 0.3 * i as f64));
    }
    push("wheel5", embedded(build(&wheel, &[], &we)), Free, true);

    let g3 = grid_in_domain(&DomainSpec::unit_square(), 4, Free).unwrap().graph;
    push("grid3x3", g3, Free, true);

    let w22 = grid_in_domain(&DomainSpec::unit_square(), 3, Wired).unwrap().graph;
    push("grid2x2-wired", w22, Wired, true);

    let w13 = grid_in_domain(&DomainSpec::Rectangle { lo: vec![0.0, 0.0], hi: vec![1.0, 0.5] }, 4, Wired)
        .unwrap()
        .graph;
    let c: Vec<f64> = (0..w13.edge_count()).map(|e| 1.0 + (e % 3) as f64 * 0.5).collect();
    push("strip1x3-wired-weighted", w13.with_conductances(&c).unwrap(), Wired, true);

    push(
        "path-wired",
        embedded(build(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], &[0, 2], &[(0, 1, 1.0), (1, 2, 1.0)])),
        Wired,
        false,
    );

    push(
        "house-wired",
        embedded(build(
            &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 1.7]],
            &[0, 1],
            &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 0.5), (2, 4, 3.0), (3, 4, 1.0), (0, 2, 0.7)],
        )),
        Wired,
        true,
    );

    push(
        "triangle-double-edge",
        build(&tri, &[], &[(0, 1, 1.0), (1, 2, 2.0), (2, 0, 1.0), (0, 1, 0.5)]),
        Free,
        false,
    );

    let k33 = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 2.0], [1.0, 2.0], [2.0, 2.0]];
    let mut ke = Vec::new();
    for a in 0..3 {
        for b in 3..6 {
            ke.push((a, b, 1.0 + ((a + b) % 3) as f64));
        }
    }
    push("k33", build(&k33, &[], &ke), Free, false);

    // bridge between two triangles
    push(
        "dumbbell",
        build(
            &[[0.0, 0.0], [1.0, 0.5], [0.0, 1.0], [2.0, 0.5], [3.0, 0.0], [3.0, 1.0]],
            &[],
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 2.0), (1, 3, 1.0), (3, 4, 0.5), (4, 5, 1.0), (5, 3, 1.0)],
        ),
        Free,
        false,
    );

    // cube {0,1}^3 with weights by direction
    let mut vs = Vec::new();
    for x in 0..8usize {
        vs.push(Vertex { pos: vec![(x & 1) as f64, (x >> 1 & 1) as f64, (x >> 2 & 1) as f64], boundary: false });
    }
    let mut es = Vec::new();
    for x in 0..8usize {
        for k in 0..3 {
            if x >> k & 1 == 0 {
                es.push(Edge { u: x, v: x | 1 << k, c: 1.0 + k as f64 });
            }
        }
    }
    push("cube", WeightedGraph::new(3, vs, es).unwrap(), Free, false);

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::dual_transfer_check;

    #[test]
    fn corpus_shape() {
        let c = corpus();
        assert!(c.len() >= 12);
        for g in &c {
            assert!(g.bc.tree_edges(&g.graph).len() <= 14, "{}", g.name);
        }
        assert!(c.iter().filter(|g| g.planar).count() >= 5);
    }

    #[test]
    fn planar_members_pass_duality() {
        for g in corpus().iter().filter(|g| g.planar) {
            let r = dual_transfer_check(&g.graph, g.bc).unwrap();
            assert!(r.discrepancy < 1e-10 && r.contraction_discrepancy < 1e-10, "{}: {r:?}", g.name);
        }
    }
}
