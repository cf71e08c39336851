//! Experiments shared by the command line and the acceptance suite.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use ustfield_core::builders::{grid_in_domain, DomainSpec};
use ustfield_core::dpp::{dgff_flow_cov, flow, DgffSampler, WilsonSampler};
use ustfield_core::fields::{
    intensity, l2_norm_sq, tree_field_draw, PatternField, TorusKernel, ZeroHeightField,
};
use ustfield_core::forests::{four_cycle_weight, UnicycleSampler};
use ustfield_core::graph::{BoundaryCondition, WeightedGraph};
use ustfield_core::green::{green, transfer_current, TransferKernel};
use ustfield_core::stats::{batch_estimate, moments};

use crate::config::{FieldConfig, GraphKind};
use crate::error::CliError;
use crate::mc::run_chunks;

/// Batches for batch-means confidence intervals.
pub const BATCHES: usize = 20;

/// Two-sided 95% interval `value ± t · se` with `BATCHES − 1` degrees of
/// freedom.
pub fn interval(value: f64, se: f64) -> (f64, f64) {
    let t = StudentsT::new(0.0, 1.0, (BATCHES - 1) as f64).expect("valid t").inverse_cdf(0.975);
    (value - t * se, value + t * se)
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldStats {
    pub samples: usize,
    pub n: usize,
    pub mean: f64,
    pub exact_mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub skewness_ci: (f64, f64),
    pub excess_kurtosis: f64,
    pub kurtosis_ci: (f64, f64),
    /// `Var / nᵈ`.
    pub variance_per_site: f64,
    pub phi_norm_sq: f64,
    /// `|𝒫⁰| I ‖φ‖²`, tree fields only.
    pub predicted_variance_per_site: Option<f64>,
    pub variance_rel_error: Option<f64>,
    /// Exact `Var / nᵈ` from all pairwise covariances, when affordable.
    pub exact_variance_per_site: Option<f64>,
}

/// Largest pattern family for which the exact variance is computed.
const EXACT_VARIANCE_LIMIT: usize = 5000;

fn summarise(xs: &[f64], n: usize, d: usize, exact_mean: f64, phi_norm_sq: f64) -> FieldStats {
    let m = moments(xs);
    let skew = batch_estimate(xs, BATCHES, |s| moments(s).skewness);
    let kurt = batch_estimate(xs, BATCHES, |s| moments(s).excess_kurtosis);
    FieldStats {
        samples: xs.len(),
        n,
        mean: m.mean,
        exact_mean,
        variance: m.variance,
        skewness: m.skewness,
        skewness_ci: interval(skew.value, skew.std_error),
        excess_kurtosis: m.excess_kurtosis,
        kurtosis_ci: interval(kurt.value, kurt.std_error),
        variance_per_site: m.variance / (n as f64).powi(d as i32),
        phi_norm_sq,
        predicted_variance_per_site: None,
        variance_rel_error: None,
        exact_variance_per_site: None,
    }
}

/// `ξ_n(φ)` for translates of a base edge pattern on the torus `(ℤ/n)ᵈ`,
/// sampled by Wilson's algorithm.
pub fn tree_field_experiment(cfg: &FieldConfig, seed: u64, threads: Option<usize>) -> Result<FieldStats, CliError> {
    let k = TorusKernel::new(cfg.n, cfg.dim)?;
    let base = cfg.pattern.base(&k)?;
    let phi = cfg.phi;
    let field = PatternField::on_torus(&k, &base, |x| phi.eval(x));
    let g = k.graph();
    let xs = run_chunks(
        seed,
        cfg.samples,
        threads,
        || WilsonSampler::new(&g, BoundaryCondition::Free),
        |s, rng| Ok(tree_field_draw(&field, s, g.edge_count(), rng)),
    )?;
    let norm = l2_norm_sq(cfg.dim, |x| phi.eval(x), 256.min(4 * cfg.n));
    let mut st = summarise(&xs, cfg.n, cfg.dim, field.exact_mean(&k)?, norm);
    let i = intensity(&k, &base, cfg.radius.unwrap_or(cfg.n))?;
    let predicted = base.len() as f64 * i.value * norm;
    st.predicted_variance_per_site = Some(predicted);
    st.variance_rel_error = Some((st.variance_per_site - predicted).abs() / predicted.abs());
    if field.patterns.len() <= EXACT_VARIANCE_LIMIT {
        st.exact_variance_per_site = Some(field.exact_variance(&k)? / (cfg.n as f64).powi(cfg.dim as i32));
    }
    Ok(st)
}

/// Zero-height field `Σ φ(x) 1{h_x = 0}` on the wired grid of resolution
/// `n` in the unit square, configurations drawn as images of Wilson trees.
pub fn zero_height_experiment(cfg: &FieldConfig, seed: u64, threads: Option<usize>) -> Result<FieldStats, CliError> {
    let grid = grid_in_domain(&DomainSpec::unit_square(), cfg.n, BoundaryCondition::Wired)?;
    let g = &grid.graph;
    let phi = cfg.phi;
    let field = ZeroHeightField::on_graph(g, |x| phi.eval(x));
    let xs = run_chunks(
        seed,
        cfg.samples,
        threads,
        || WilsonSampler::new(g, BoundaryCondition::Wired).map_err(CliError::from),
        |s, rng| Ok(field.draw(g, s, rng)?),
    )?;
    let norm = l2_norm_sq(2, |x| phi.eval(x), 256);
    Ok(summarise(&xs, cfg.n, 2, field.exact_mean(g)?, norm))
}

pub fn field_experiment(cfg: &FieldConfig, seed: u64, threads: Option<usize>) -> Result<FieldStats, CliError> {
    match cfg.graph {
        GraphKind::Torus => tree_field_experiment(cfg, seed, threads),
        GraphKind::Grid => zero_height_experiment(cfg, seed, threads),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Cycle4 {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
    pub seed: u64,
    /// Same probability from three-edge tree marginals, no sampling.
    pub exact: f64,
    pub lambda_over_kappa: f64,
    pub lambda_over_kappa_se: f64,
}

/// Probability that the cycle of the spanning unicycle of the `n × n` torus
/// is a unit square, given that it passes through a fixed edge.
///
/// Each draw `(T, e)` carries weight `X = C_out / L` towards the unicycle
/// measure. By translation and axis symmetry, summing `1{e₁ ∈ γ}` over all
/// edges gives `L`, so the conditional probability is the ratio
/// `E[4 X 1{L = 4}] / E[X L]`. The exact value uses the two squares through
/// `e₁`, each of weight `c P(e₂, e₃, e₄)`, over `λ_{e₁}/κ = C_out / 2n²`.
pub fn cycle4(n: usize, samples: usize, seed: u64, threads: Option<usize>) -> Result<Cycle4, CliError> {
    let k = TorusKernel::new(n, 2)?;
    let face = [k.edge(&[0, 0], 0), k.edge(&[1, 0], 1), k.edge(&[0, 1], 0), k.edge(&[0, 0], 1)];
    let w = four_cycle_weight(&k, face)?;
    let g = k.graph();
    let draws = run_chunks(seed, samples, threads, || UnicycleSampler::new(&g, BoundaryCondition::Free), |s, rng| Ok(s.draw(&g, rng)))?;
    let a: Vec<f64> = draws.iter().map(|d| if d.length == 4 { 4.0 * d.weight } else { 0.0 }).collect();
    let b: Vec<f64> = draws.iter().map(|d| d.weight * d.length as f64).collect();
    let (ma, mb) = (moments(&a).mean, moments(&b).mean);
    let estimate = ma / mb;
    // delta method for a ratio of means
    let resid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - estimate * y).collect();
    let est_se = (moments(&resid).variance / samples as f64).sqrt() / mb;
    let xs: Vec<f64> = draws.iter().map(|d| d.weight).collect();
    let m = moments(&xs);
    let edges = (2 * n * n) as f64;
    let c_out = edges - (n * n - 1) as f64;
    Ok(Cycle4 {
        estimate,
        ci_low: estimate - 1.96 * est_se,
        ci_high: estimate + 1.96 * est_se,
        samples,
        seed,
        exact: 2.0 * w * edges / c_out,
        lambda_over_kappa: m.mean,
        lambda_over_kappa_se: (m.variance / samples as f64).sqrt(),
    })
}

/// `−16/π³ + 8/π²`.
pub fn cycle4_target() -> f64 {
    use std::f64::consts::PI;
    -16.0 / PI.powi(3) + 8.0 / (PI * PI)
}

#[derive(Debug, Clone, Serialize)]
pub struct DgffCheck {
    /// `max |Cov(J(e), J(f)) − T(e, f) / c(f)|` with the covariance from `G`.
    pub identity_defect: f64,
    /// Largest `|mean(J_e J_f) − Cov| / se` over all edge pairs.
    pub worst_z: f64,
    pub pairs: usize,
    pub samples: usize,
}

/// Flow `J = dΓ` of the discrete Gaussian free field against the transfer
/// current.
pub fn dgff_check(g: &WeightedGraph, bc: BoundaryCondition, samples: usize, seed: u64, threads: Option<usize>) -> Result<DgffCheck, CliError> {
    let gr = green(g, bc)?;
    let t = transfer_current(g, bc)?;
    let edges: Vec<usize> = (0..g.edge_count())
        .filter(|&e| bc == BoundaryCondition::Free || !(g.is_boundary(g.edge(e).u) && g.is_boundary(g.edge(e).v)))
        .collect();
    let cov = dgff_flow_cov(g, &gr, &edges);
    let mut defect: f64 = 0.0;
    for (i, &e) in edges.iter().enumerate() {
        for (j, &f) in edges.iter().enumerate() {
            defect = defect.max((cov[(i, j)] - t.t(e, f) / g.conductance(f)).abs());
        }
    }
    let flows = run_chunks(seed, samples, threads, || DgffSampler::new(g, bc), |s, rng| Ok(flow(g, &s.sample(rng))))?;
    let mut worst: f64 = 0.0;
    for (i, &e) in edges.iter().enumerate() {
        for (j, &f) in edges.iter().enumerate().take(i + 1) {
            let prods: Vec<f64> = flows.iter().map(|j| j[e] * j[f]).collect();
            let m = moments(&prods);
            let se = (m.variance / prods.len() as f64).sqrt();
            worst = worst.max((m.mean - cov[(i, j)]).abs() / se);
        }
    }
    let m = edges.len();
    Ok(DgffCheck { identity_defect: defect, worst_z: worst, pairs: m * (m + 1) / 2, samples })
}
