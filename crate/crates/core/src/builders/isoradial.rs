use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;

use super::{BuildError, DomainSpec};
use crate::graph::{rotation_from_embedding, Edge, Vertex, WeightedGraph};

/// A stack of rhombus rows. Every rhombus has sides `a = ε(1, 0)` and
/// `b_j = ε(cos φ_j, sin φ_j)`, where `φ_j` is the angle of row `j`. Diamond
/// lattice points `i a + Σ_{m<j} b_m` with `i + j` even are the primal
/// vertices; each rhombus contributes the diagonal joining its two even
/// corners, with half-angle `φ_j/2` or `π/2 − φ_j/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoradialSpec {
    pub row_angles: Vec<f64>,
    /// Rhombi per row.
    pub width: usize,
    pub eps: f64,
    /// Smallest admissible half-angle.
    pub theta_min: f64,
}

impl IsoradialSpec {
    pub fn square(width: usize, rows: usize) -> Self {
        Self::rows(vec![FRAC_PI_2; rows], width)
    }

    /// All rows at 60°: weights `tan(π/6)` and `tan(π/3)`.
    pub fn rhombic60(width: usize, rows: usize) -> Self {
        Self::rows(vec![core::f64::consts::FRAC_PI_3; rows], width)
    }

    /// Rows cycling through the given angles.
    pub fn mixed(angles: &[f64], width: usize, rows: usize) -> Self {
        Self::rows((0..rows).map(|j| angles[j % angles.len()]).collect(), width)
    }

    fn rows(row_angles: Vec<f64>, width: usize) -> Self {
        IsoradialSpec { row_angles, width, eps: 1.0, theta_min: 0.05 }
    }

    fn check(&self) -> Result<(), BuildError> {
        for &phi in &self.row_angles {
            let t = 0.5 * phi;
            if !(t >= self.theta_min && t <= FRAC_PI_2 - self.theta_min) {
                return Err(BuildError::AngleBound { angle: phi, min: self.theta_min });
            }
        }
        if self.width < 1 || self.row_angles.is_empty() || !(self.eps > 0.0) {
            return Err(BuildError::BadDomain("empty isoradial spec"));
        }
        Ok(())
    }

    /// Position of diamond point `(i, j)`.
    pub fn point(&self, i: i64, j: usize) -> [f64; 2] {
        let mut p = [self.eps * i as f64, 0.0];
        for &phi in &self.row_angles[..j] {
            p[0] += self.eps * phi.cos();
            p[1] += self.eps * phi.sin();
        }
        p
    }

    /// Half-angle of the primal diagonal of rhombus `(i, j)`.
    pub fn half_angle(&self, i: usize, j: usize) -> f64 {
        let phi = self.row_angles[j];
        if (i + j) % 2 == 0 {
            0.5 * phi
        } else {
            FRAC_PI_2 - 0.5 * phi
        }
    }
}

/// Isoradial graph with the half-angle of every edge.
#[derive(Debug, Clone)]
pub struct Isoradial {
    pub graph: WeightedGraph,
    pub theta: Vec<f64>,
}

/// Primal graph of the tiling restricted to the vertices inside `window`
/// (everything when `None`), free boundary, conductances `tan θ_e`.
pub fn isoradial(spec: &IsoradialSpec, window: Option<&DomainSpec>) -> Result<Isoradial, BuildError> {
    spec.check()?;
    let (w, h) = (spec.width, spec.row_angles.len());
    let mut id = vec![vec![usize::MAX; h + 1]; w + 1];
    let mut vertices = Vec::new();
    for j in 0..=h {
        for i in 0..=w {
            if (i + j) % 2 != 0 {
                continue;
            }
            let p = spec.point(i as i64, j);
            if window.is_none_or(|d| d.contains(&p)) {
                id[i][j] = vertices.len();
                vertices.push(Vertex { pos: p.to_vec(), boundary: false });
            }
        }
    }
    let mut edges = Vec::new();
    let mut theta = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let (a, b) = if (i + j) % 2 == 0 { ((i, j), (i + 1, j + 1)) } else { ((i + 1, j), (i, j + 1)) };
            let (u, v) = (id[a.0][a.1], id[b.0][b.1]);
            if u == usize::MAX || v == usize::MAX {
                continue;
            }
            let t = spec.half_angle(i, j);
            edges.push(Edge { u, v, c: t.tan() });
            theta.push(t);
        }
    }
    if vertices.is_empty() {
        return Err(BuildError::EmptyIntersection(0));
    }
    let g = WeightedGraph::new(2, vertices, edges)?;
    let rot = rotation_from_embedding(&g)?;
    Ok(Isoradial { graph: g.with_rotation(rot)?, theta })
}

/// The same tiling with opposite sides of the `width × rows` block glued.
/// Both dimensions must be even so that parity survives the gluing.
pub fn isoradial_torus(spec: &IsoradialSpec) -> Result<Isoradial, BuildError> {
    spec.check()?;
    let (w, h) = (spec.width, spec.row_angles.len());
    if w % 2 != 0 || h % 2 != 0 || w < 4 || h < 4 {
        return Err(BuildError::BadDomain("isoradial torus needs even width and rows, at least 4"));
    }
    let mut id = vec![vec![usize::MAX; h]; w];
    let mut vertices = Vec::new();
    for j in 0..h {
        for i in 0..w {
            if (i + j) % 2 == 0 {
                id[i][j] = vertices.len();
                vertices.push(Vertex { pos: spec.point(i as i64, j).to_vec(), boundary: false });
            }
        }
    }
    let mut edges = Vec::new();
    let mut theta = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let (a, b) = if (i + j) % 2 == 0 { ((i, j), (i + 1, j + 1)) } else { ((i + 1, j), (i, j + 1)) };
            let (u, v) = (id[a.0 % w][a.1 % h], id[b.0 % w][b.1 % h]);
            let t = spec.half_angle(i, j);
            edges.push(Edge { u, v, c: t.tan() });
            theta.push(t);
        }
    }
    Ok(Isoradial { graph: WeightedGraph::new(2, vertices, edges)?, theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BoundaryCondition;
    use crate::green::{transfer_current, TransferKernel};

    #[test]
    fn square_tiling_is_unit_weight_grid() {
        let g = isoradial(&IsoradialSpec::square(6, 6), None).unwrap();
        assert!(g.graph.edges().iter().all(|e| (e.c - 1.0).abs() < 1e-15));
        let interior = (0..g.graph.vertex_count()).filter(|&v| g.graph.degree(v) == 4).count();
        assert!(interior > 0);
    }

    #[test]
    fn sixty_degree_weights() {
        let g = isoradial(&IsoradialSpec::rhombic60(4, 2), None).unwrap();
        let s3 = 3f64.sqrt();
        for e in g.graph.edges() {
            assert!((e.c - 1.0 / s3).abs() < 1e-12 || (e.c - s3).abs() < 1e-12);
        }
    }

    #[test]
    fn rhombi_have_side_eps() {
        let spec = IsoradialSpec::mixed(&[1.0, 1.7, 2.2], 5, 6);
        for j in 0..6 {
            for i in 0..5i64 {
                let c = [spec.point(i, j), spec.point(i + 1, j), spec.point(i + 1, j + 1), spec.point(i, j + 1)];
                for k in 0..4 {
                    let (p, q) = (c[k], c[(k + 1) % 4]);
                    assert!(((p[0] - q[0]).hypot(p[1] - q[1]) - spec.eps).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn angle_bound_is_enforced() {
        let spec = IsoradialSpec::mixed(&[0.05], 4, 4);
        assert!(matches!(isoradial(&spec, None), Err(BuildError::AngleBound { .. })));
    }

    #[test]
    fn torus_density_near_two_theta_over_pi() {
        let g = isoradial_torus(&IsoradialSpec::mixed(&[1.2, 2.0], 8, 8)).unwrap();
        let t = transfer_current(&g.graph, BoundaryCondition::Free).unwrap();
        for e in 0..g.graph.edge_count() {
            let want = 2.0 / core::f64::consts::PI * g.theta[e];
            assert!((t.t(e, e) - want).abs() < 0.03);
        }
    }
}
