//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status on
//! any failure. Every tolerance is a named constant below.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ustfield::experiments::{cycle4, cycle4_target, dgff_check, tree_field_experiment, zero_height_experiment, FieldStats};
use ustfield::config::{FieldConfig, GraphKind, PatternKind, Phi, Thresholds};
use ustfield_core::builders::{corpus, isoradial_torus, CorpusGraph, DomainSpec, IsoradialSpec};
use ustfield_core::dpp::edges_prob;
use ustfield_core::fields::{
    edge_type_sum_rule, isoradial_density_defect, susceptibility_check, ticv_convergence, zero_height_center, TorusKernel,
};
use ustfield_core::forests::{two_forest_check, unicycle_quadratic};
use ustfield_core::graph::{BoundaryCondition, DirectedEdge, VertexId, WeightedGraph};
use ustfield_core::green::{dual_transfer_check, transfer_current};
use ustfield_core::oracle::{enumerate, Kind};
use ustfield_core::sandpile::{
    burning_bijection, chain_closure_oracle, config_from_tree, is_minimal, is_recurrent, minimal_prob, oracle_event_prob,
    stable_configs, with_sink, SandpileError,
};

const SEED: u64 = 20240611;

const ORACLE_TOL: f64 = 1e-9;
const PROJECTION_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-9;
const RECIPROCITY_TOL: f64 = 1e-12;
const DUAL_TOL: f64 = 1e-10;
const QUADRATIC_REL_TOL: f64 = 1e-9;
const TWO_FOREST_TOL: f64 = 1e-9;
const CYCLE4_WINDOW: (f64, f64) = (0.284, 0.304);
const ZERO_HEIGHT_TOL: f64 = 5e-3;
const TICV_TOL: f64 = 0.05;
const SKEW_TOL: f64 = 0.1;
const KURT_TOL: f64 = 0.2;
const VARIANCE_REL_TOL: f64 = 0.1;
const SUM_RULE_BOUND: f64 = 1e-6;
const ISORADIAL_TOL: f64 = 1e-2;
const DGFF_IDENTITY_TOL: f64 = 1e-10;
const DGFF_Z: f64 = 4.0;
const SUSCEPTIBILITY_TOL: f64 = 1e-6;
const SUSCEPTIBILITY_STEP: f64 = 1e-4;

type Outcome = Result<String, String>;

fn non_sink_edges(g: &WeightedGraph, bc: BoundaryCondition) -> Vec<usize> {
    (0..g.edge_count()).filter(|&e| bc == BoundaryCondition::Free || !g.is_boundary_edge(e)).collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn corpus_size_ok(c: &[CorpusGraph]) -> bool {
    c.len() >= 12 && c.iter().all(|c| c.graph.edge_count() <= 14)
}

/// Edge-inclusion probabilities of every subset of non-sink edges against
/// the weighted fraction of enumerated trees containing it.
fn criterion1() -> Outcome {
    let cs = corpus();
    let (mut worst, mut subsets) = (0.0f64, 0usize);
    for c in &cs {
        let t = transfer_current(&c.graph, c.bc).map_err(|e| e.to_string())?;
        let trees = enumerate(&c.graph, c.bc, Kind::Tree).map_err(|e| e.to_string())?;
        let masks: Vec<(u32, f64)> =
            trees.items.iter().map(|i| (i.edges.iter().fold(0u32, |m, &e| m | 1 << e), i.weight)).collect();
        let edges = non_sink_edges(&c.graph, c.bc);
        for s in 0u32..1 << edges.len() {
            let chosen: Vec<usize> = (0..edges.len()).filter(|i| s >> i & 1 == 1).map(|i| edges[i]).collect();
            let m = chosen.iter().fold(0u32, |m, &e| m | 1 << e);
            let oracle: f64 = masks.iter().filter(|(t, _)| t & m == m).map(|(_, w)| w).sum::<f64>() / trees.total;
            let p = edges_prob(&t, &chosen).map_err(|e| e.to_string())?;
            worst = worst.max((p - oracle).abs());
            subsets += 1;
        }
    }
    check(
        corpus_size_ok(&cs) && worst < ORACLE_TOL,
        format!("{} graphs, {subsets} edge subsets, max |det - enumeration| = {worst:.2e} (tol {ORACLE_TOL:.0e})", cs.len()),
    )
}

fn criterion2() -> Outcome {
    let (mut proj, mut trace, mut recip) = (0.0f64, 0.0f64, 0.0f64);
    let cs = corpus();
    for c in &cs {
        let t = transfer_current(&c.graph, c.bc).map_err(|e| e.to_string())?;
        let rank = match c.bc {
            BoundaryCondition::Free => c.graph.vertex_count() - 1,
            BoundaryCondition::Wired => c.graph.interior().len(),
        };
        proj = proj.max(t.projection_defect());
        trace = trace.max((t.trace() - rank as f64).abs());
        recip = recip.max(t.reciprocity_defect());
    }
    check(
        proj < PROJECTION_TOL && trace < TRACE_TOL && recip < RECIPROCITY_TOL,
        format!("{} graphs: K^2-K {proj:.2e}, trace {trace:.2e}, reciprocity {recip:.2e}", cs.len()),
    )
}

fn criterion3() -> Outcome {
    let (mut worst, mut graphs, mut pairs) = (0.0f64, 0, 0);
    for c in corpus().iter().filter(|c| c.planar) {
        let d = dual_transfer_check(&c.graph, c.bc).map_err(|e| e.to_string())?;
        worst = worst.max(d.discrepancy).max(d.contraction_discrepancy);
        graphs += 1;
        pairs += d.pairs;
    }
    check(
        graphs >= 5 && worst < DUAL_TOL,
        format!("{graphs} planar graphs, {pairs} edge pairs, max |T - (delta - c_b/c_a T*)| = {worst:.2e} (tol {DUAL_TOL:.0e})"),
    )
}

fn criterion4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut quad, mut forms) = (0.0f64, 0);
    let (mut forest, mut pairs) = (0.0f64, 0);
    for c in corpus() {
        let t = transfer_current(&c.graph, c.bc).map_err(|e| e.to_string())?;
        match c.bc {
            BoundaryCondition::Free => {
                for _ in 0..20 {
                    let theta: Vec<f64> = (0..c.graph.edge_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let r = unicycle_quadratic(&c.graph, c.bc, &t, &theta).map_err(|e| e.to_string())?;
                    quad = quad.max(r.diff() / r.rhs.abs().max(1e-300));
                    forms += 1;
                }
            }
            BoundaryCondition::Wired => {
                for a in 0..c.graph.edge_count() {
                    for b in 0..c.graph.edge_count() {
                        let r = two_forest_check(&c.graph, c.bc, &t, DirectedEdge::forward(a), DirectedEdge::forward(b))
                            .map_err(|e| e.to_string())?;
                        forest = forest.max(r.diff());
                        pairs += 1;
                    }
                }
            }
        }
    }
    check(
        forms > 0 && pairs > 0 && quad < QUADRATIC_REL_TOL && forest < TWO_FOREST_TOL,
        format!(
            "{forms} random forms, max rel defect {quad:.2e}; {pairs} wired ordered pairs, max two-forest defect {forest:.2e}"
        ),
    )
}

fn criterion5() -> Outcome {
    let r = cycle4(64, 100_000, SEED, None).map_err(|e| e.to_string())?;
    check(
        r.estimate > CYCLE4_WINDOW.0 && r.estimate < CYCLE4_WINDOW.1,
        format!(
            "estimate {:.5} (95% CI [{:.5}, {:.5}]), exact on the 64-torus {:.5}, target {:.5}, window [{}, {}]",
            r.estimate,
            r.ci_low,
            r.ci_high,
            r.exact,
            cycle4_target(),
            CYCLE4_WINDOW.0,
            CYCLE4_WINDOW.1
        ),
    )
}

fn criterion6() -> Outcome {
    let rows: Vec<_> = [32, 64, 128].iter().map(|&n| zero_height_center(n)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let decreasing = rows.windows(2).all(|p| p[1].error < p[0].error);
    let last = rows.last().expect("three sizes").error;
    let table: Vec<String> = rows.iter().map(|r| format!("n={} q={:.6} err={:.2e}", r.n, r.q, r.error)).collect();
    check(decreasing && last < ZERO_HEIGHT_TOL, format!("{}; target {:.6}", table.join(", "), rows[0].target))
}

/// Exhaustive `(W, ξ)` with `|W| ≤ 3`, with minimality decided from the
/// recurrent list.
fn minimal_patterns(g: &WeightedGraph, rec: &[Vec<u32>]) -> Vec<(Vec<VertexId>, Vec<u32>, bool)> {
    let interior = g.interior();
    let mut subsets: Vec<Vec<VertexId>> = Vec::new();
    for (i, &a) in interior.iter().enumerate() {
        subsets.push(vec![a]);
        for (j, &b) in interior.iter().enumerate().skip(i + 1) {
            subsets.push(vec![a, b]);
            for &c in &interior[j + 1..] {
                subsets.push(vec![a, b, c]);
            }
        }
    }
    let mut out = Vec::new();
    for w in subsets {
        let part_of = |s: &[u32]| rec.iter().any(|h| w.iter().zip(s).all(|(&x, &v)| h[x] == v));
        let mut xi = vec![0u32; w.len()];
        'odometer: loop {
            let mut minimal = part_of(&xi);
            for i in 0..w.len() {
                if xi[i] > 0 {
                    let mut l = xi.clone();
                    l[i] -= 1;
                    minimal &= !part_of(&l);
                }
            }
            out.push((w.clone(), xi.clone(), minimal));
            for i in 0..w.len() {
                xi[i] += 1;
                if (xi[i] as usize) < g.degree(w[i]) {
                    continue 'odometer;
                }
                xi[i] = 0;
            }
            break;
        }
    }
    out
}

fn criterion7() -> Outcome {
    let cs = corpus();
    let (mut stable, mut matched, mut separated, mut nonuniform) = (0, 0, 0, 0);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for c in &cs {
        let g = with_sink(&c.graph, c.bc);
        let unit = g.with_conductances(&vec![1.0; g.edge_count()]).map_err(|e| e.to_string())?;
        let rec = chain_closure_oracle(&g, 1 << 22).map_err(|e| e.to_string())?;
        let trees: BTreeSet<Vec<usize>> =
            enumerate(&unit, BoundaryCondition::Wired, Kind::Tree).map_err(|e| e.to_string())?.items.into_iter().map(|i| i.edges).collect();
        if rec.len() != trees.len() {
            failures.push(format!("{}: {} recurrent vs {} trees", c.name, rec.len(), trees.len()));
        }
        for h in stable_configs(&g) {
            stable += 1;
            if is_recurrent(&g, &h).map_err(|e| e.to_string())? != rec.binary_search(&h).is_ok() {
                failures.push(format!("{}: burning test disagrees at {h:?}", c.name));
            }
        }
        let mut images = BTreeSet::new();
        for h in &rec {
            let mut t = burning_bijection(&g, h).map_err(|e| e.to_string())?;
            t.sort_unstable();
            if config_from_tree(&g, &t).map_err(|e| e.to_string())? != *h {
                failures.push(format!("{}: bijection does not invert at {h:?}", c.name));
            }
            images.insert(t);
        }
        if images != trees {
            failures.push(format!("{}: burning images are not the spanning trees", c.name));
        }
        let t = transfer_current(&g, BoundaryCondition::Wired).map_err(|e| e.to_string())?;
        for (w, xi, minimal) in minimal_patterns(&g, &rec) {
            if is_minimal(&g, &w, &xi).map_err(|e| e.to_string())? != minimal {
                failures.push(format!("{}: minimality of {w:?} {xi:?}", c.name));
            }
            if !minimal {
                continue;
            }
            match minimal_prob(&g, &t, &w, &xi) {
                Ok(p) => {
                    let q = oracle_event_prob(&g, &rec, &w, &xi).map_err(|e| e.to_string())?;
                    worst = worst.max((p - q).abs());
                    matched += 1;
                }
                Err(SandpileError::SeparatesSink) => separated += 1,
                Err(SandpileError::NonUniformWeights) => nonuniform += 1,
                Err(e) => failures.push(format!("{}: {w:?} {xi:?}: {e}", c.name)),
            }
        }
    }
    let detail = format!(
        "{} graphs, {stable} stable configurations; {matched} minimal patterns max |det - oracle| = {worst:.2e}; \
         excluded: {separated} sink-separating, {nonuniform} non-uniform weights{}",
        cs.len(),
        if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
    );
    check(failures.is_empty() && matched > 0 && worst < ORACLE_TOL, detail)
}

fn criterion8() -> Outcome {
    let rows = ticv_convergence(&DomainSpec::unit_square(), &[0.3, 0.4], &[0.7, 0.6], (0, 0), &[16, 32, 64, 128])
        .map_err(|e| e.to_string())?;
    let decreasing = rows.windows(2).all(|p| p[1].rel_error < p[0].rel_error);
    let last = rows.last().expect("four sizes").rel_error;
    let table: Vec<String> = rows.iter().map(|r| format!("n={} {:.3}%", r.n, 100.0 * r.rel_error)).collect();
    check(decreasing && last < TICV_TOL, format!("relative errors {}", table.join(", ")))
}

fn moments_ok(s: &FieldStats) -> bool {
    s.skewness.abs() < SKEW_TOL && s.excess_kurtosis.abs() < KURT_TOL
}

fn describe(s: &FieldStats) -> String {
    format!(
        "skew {:.4} CI [{:.3}, {:.3}], kurt {:.4} CI [{:.3}, {:.3}]",
        s.skewness, s.skewness_ci.0, s.skewness_ci.1, s.excess_kurtosis, s.kurtosis_ci.0, s.kurtosis_ci.1
    )
}

fn criterion9() -> Outcome {
    let tree = FieldConfig {
        graph: GraphKind::Torus,
        pattern: PatternKind::HorizontalEdge,
        n: 32,
        dim: 2,
        samples: 10_000,
        seed: Some(SEED),
        phi: Phi::CosSin,
        radius: None,
        cross: None,
        thresholds: Thresholds::default(),
    };
    let a = tree_field_experiment(&tree, SEED, None).map_err(|e| e.to_string())?;
    let rel = a.variance_rel_error.unwrap_or(f64::INFINITY);
    // 17 grid steps in the unit square leave a 16 × 16 interior
    let sand = FieldConfig { graph: GraphKind::Grid, pattern: PatternKind::ZeroHeight, n: 17, phi: Phi::Tanh, ..tree };
    let b = zero_height_experiment(&sand, SEED, None).map_err(|e| e.to_string())?;
    check(
        moments_ok(&a) && rel < VARIANCE_REL_TOL && moments_ok(&b),
        format!(
            "tree field: {}, Var/n^2 {:.5} vs predicted {:.5} ({:.2}%); zero-height field: {}",
            describe(&a),
            a.variance_per_site,
            a.predicted_variance_per_site.unwrap_or(f64::NAN),
            100.0 * rel,
            describe(&b)
        ),
    )
}

fn criterion10() -> Outcome {
    let k = TorusKernel::new(32, 2).map_err(|e| e.to_string())?;
    let r = edge_type_sum_rule(&k, 16).map_err(|e| e.to_string())?;
    // Infinite-lattice stand-in: a 128-torus truncated at R = 16, whose tail
    // decays only like R^-2.
    let big = TorusKernel::new(128, 2).map_err(|e| e.to_string())?;
    let s = edge_type_sum_rule(&big, 16).map_err(|e| e.to_string())?;
    check(
        r.complete && r.tail_bound < SUM_RULE_BOUND && r.total.abs() <= r.tail_bound + 1e-12 && s.total.abs() <= s.tail_bound,
        format!(
            "32-torus R=16: sum {:.2e}, bound {:.1e}; 128-torus R=16 (info): sum {:.2e}, bound {:.2e}",
            r.total, r.tail_bound, s.total, s.tail_bound
        ),
    )
}

fn criterion11() -> Outcome {
    let angles = [1.0, 1.3, 2.0, 1.6];
    let iso = isoradial_torus(&IsoradialSpec::mixed(&angles, 32, 32)).map_err(|e| e.to_string())?;
    let classes = isoradial_density_defect(&iso.graph, &iso.theta).map_err(|e| e.to_string())?;
    let worst = classes.iter().map(|c| c.1).fold(0.0, f64::max);
    let table: Vec<String> = classes.iter().map(|(t, e)| format!("theta {t:.3}: {e:.1e}")).collect();
    check(worst < ISORADIAL_TOL, format!("32x32 torus, {} edge classes, {}", classes.len(), table.join(", ")))
}

fn criterion12() -> Outcome {
    let (mut identity, mut z, mut pairs) = (0.0f64, 0.0f64, 0);
    for (i, c) in corpus().iter().enumerate() {
        let r = dgff_check(&c.graph, c.bc, 10_000, SEED + i as u64, None).map_err(|e| e.to_string())?;
        identity = identity.max(r.identity_defect);
        z = z.max(r.worst_z);
        pairs += r.pairs;
    }
    check(
        identity < DGFF_IDENTITY_TOL && z < DGFF_Z,
        format!("identity defect {identity:.2e}; {pairs} Monte Carlo pairs, worst |z| {z:.2}"),
    )
}

/// Family: edges sharing the parity of `x`. The family of all edges would
/// give a trivially zero sum since every tree has the same edge count.
fn criterion13() -> Outcome {
    let (mut worst, mut checks) = (0.0f64, 0);
    for c in corpus() {
        let edges = non_sink_edges(&c.graph, c.bc);
        for &x in &edges {
            let family: Vec<usize> = edges.iter().copied().filter(|e| e % 2 == x % 2).collect();
            let s = susceptibility_check(&c.graph, c.bc, x, &family, SUSCEPTIBILITY_STEP).map_err(|e| e.to_string())?;
            worst = worst.max(s.diff());
            checks += 1;
        }
    }
    check(
        worst < SUSCEPTIBILITY_TOL,
        format!("{checks} (graph, edge) pairs, max |sum Cov - finite difference| = {worst:.2e} (h = {SUSCEPTIBILITY_STEP:.0e})"),
    )
}

fn main() {
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let criteria: [(usize, fn() -> Outcome); 13] = [
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
        (9, criterion9),
        (10, criterion10),
        (11, criterion11),
        (12, criterion12),
        (13, criterion13),
    ];
    let mut failed = 0;
    for (i, f) in criteria {
        if filter.is_some_and(|k| k != i) {
            continue;
        }
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("criterion {i} PASS: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("criterion {i} FAIL: {d} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
