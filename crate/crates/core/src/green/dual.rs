
use super::{transfer_current, GreenError, TransferKernel};
use crate::graph::{planar_dual, wired_contraction, BoundaryCondition, WeightedGraph};

/// Result of comparing a planar graph's transfer current with its dual's.
#[derive(Debug, Clone, Copy)]
pub struct DualCheck {
    /// `max |T(a,b) − T̃*(a*,b*)|` over all pairs of primal edges, where
    /// `T̃*(a*,b*) = δ_ab − (c(b)/c(a)) T_{G*}(a*,b*)` is the dual's cycle
    /// kernel (the complementary projection) pulled back to primal edges.
    pub discrepancy: f64,
    /// For wired input, `max |T_wired − T_{G/∂V}|` over edges that survive
    /// the contraction; zero for free input.
    pub contraction_discrepancy: f64,
    pub pairs: usize,
}

/// Planar duality check.
///
/// Free input pairs `G` with its full dual; wired input pairs `G/∂V` (the
/// boundary glued at the outer face) with the free dual of that graph. Star
/// space of the primal is mapped isometrically onto the cycle space of the
/// dual by `α ↦ c α`, hence `K_G = I − K_{G*}` edge by edge.
pub fn dual_transfer_check(g: &WeightedGraph, bc: BoundaryCondition) -> Result<DualCheck, GreenError> {
    let (h, contraction) = match bc {
        BoundaryCondition::Free => (g.without_boundary(), 0.0),
        BoundaryCondition::Wired => {
            let wc = wired_contraction(g)?;
            let tw = transfer_current(g, BoundaryCondition::Wired)?;
            let th = transfer_current(&wc.graph, BoundaryCondition::Free)?;
            let mut worst: f64 = 0.0;
            for a in 0..g.edge_count() {
                for b in 0..g.edge_count() {
                    let want = match (wc.edge_map[a], wc.edge_map[b]) {
                        (Some(x), Some(y)) => th.t(x, y),
                        _ => 0.0,
                    };
                    worst = worst.max((tw.t(a, b) - want).abs());
                }
            }
            (wc.graph, worst)
        }
    };
    let dual = planar_dual(&h)?;
    let tp = transfer_current(&h, BoundaryCondition::Free)?;
    let td = transfer_current(&dual.graph, BoundaryCondition::Free)?;
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    let m = h.edge_count();
    for a in 0..m {
        for b in 0..m {
            let delta = if a == b { 1.0 } else { 0.0 };
            let pulled = delta - h.conductance(b) / h.conductance(a) * td.t(a, b);
            worst = worst.max((tp.t(a, b) - pulled).abs());
            pairs += 1;
        }
    }
    Ok(DualCheck { discrepancy: worst, contraction_discrepancy: contraction, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::triangle;

    #[test]
    fn triangle_against_three_parallel_edges() {
        let r = dual_transfer_check(&triangle([1.0; 3]), BoundaryCondition::Free).unwrap();
        assert!(r.discrepancy < 1e-12);
        let r = dual_transfer_check(&triangle([1.0, 2.0, 5.0]), BoundaryCondition::Free).unwrap();
        assert!(r.discrepancy < 1e-12);
    }
}
