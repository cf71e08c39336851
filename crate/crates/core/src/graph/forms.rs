use alloc::vec;
use alloc::vec::Vec;

use super::{BoundaryCondition, DirectedEdge, WeightedGraph};

/// Function on vertices, indexed by vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction(pub Vec<f64>);

/// Antisymmetric function on directed edges, stored by its value on the
/// reference orientation of each edge.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm(pub Vec<f64>);

impl VertexFunction {
    pub fn zeros(n: usize) -> Self {
        VertexFunction(vec![0.0; n])
    }

    pub fn delta(n: usize, v: usize) -> Self {
        let mut f = Self::zeros(n);
        f.0[v] = 1.0;
        f
    }
}

impl OneForm {
    pub fn zeros(m: usize) -> Self {
        OneForm(vec![0.0; m])
    }

    /// Indicator form: `1` on `d`, `-1` on its reversal.
    pub fn indicator(m: usize, d: DirectedEdge) -> Self {
        let mut a = Self::zeros(m);
        a.0[d.edge] = d.sign();
        a
    }

    pub fn at(&self, d: DirectedEdge) -> f64 {
        d.sign() * self.0[d.edge]
    }
}

/// `df(uv) = f(v) - f(u)`.
pub fn derivative(g: &WeightedGraph, f: &VertexFunction) -> OneForm {
    OneForm(g.edges().iter().map(|e| f.0[e.v] - f.0[e.u]).collect())
}

/// `d*α(v) = Σ_{v'∼v} c(v'v) α(v'v)`, evaluated at every vertex.
pub fn coderivative(g: &WeightedGraph, a: &OneForm) -> VertexFunction {
    let mut out = vec![0.0; g.vertex_count()];
    for (id, e) in g.edges().iter().enumerate() {
        out[e.v] += e.c * a.0[id];
        out[e.u] -= e.c * a.0[id];
    }
    VertexFunction(out)
}

/// `Δf(v) = Σ c(vv')(f(v) - f(v'))`.
pub fn laplacian(g: &WeightedGraph, f: &VertexFunction) -> VertexFunction {
    coderivative(g, &derivative(g, f))
}

/// `⟨f, h⟩ = Σ f h` over the vertices that carry unknowns under `bc`.
pub fn inner0(g: &WeightedGraph, bc: BoundaryCondition, f: &VertexFunction, h: &VertexFunction) -> f64 {
    bc.active(g).into_iter().map(|v| f.0[v] * h.0[v]).sum()
}

/// `⟨α, β⟩ = ½ Σ_{E±} c α β = Σ_E c α β`.
pub fn inner1(g: &WeightedGraph, a: &OneForm, b: &OneForm) -> f64 {
    g.edges().iter().enumerate().map(|(i, e)| e.c * a.0[i] * b.0[i]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::triangle;

    #[test]
    fn adjointness_on_triangle() {
        let g = triangle([1.0, 0.5, 2.0]);
        let f = VertexFunction(vec![0.3, -1.2, 2.0]);
        let a = OneForm(vec![1.0, -0.4, 0.7]);
        let lhs = inner1(&g, &derivative(&g, &f), &a);
        let rhs = inner0(&g, BoundaryCondition::Free, &f, &coderivative(&g, &a));
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn laplacian_formula() {
        let g = triangle([1.0, 1.0, 2.0]);
        let f = VertexFunction(vec![1.0, 0.0, 0.0]);
        let l = laplacian(&g, &f);
        // vertex 0 touches edges 0 (c=1) and 2 (c=2)
        assert_eq!(l.0, vec![3.0, -1.0, -2.0]);
    }
}
