//! Pattern fields: intensities and cross-intensities on the torus, exact
//! means and variances of weighted pattern counts, convergence of rescaled
//! transfer currents to continuum Green derivatives, edge-count covariances
//! of regions, the zero-height probability on grids and the susceptibility
//! reading of the covariance sum.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;

use crate::builders::{grid_in_domain, torus, unit_sphere_area, BuildError, ContinuumGreen, DomainSpec, Grid};
use crate::dpp::{pattern_prob, DppError, Pattern};
use crate::forests::{log_kappa, ForestError};
use crate::graph::{BoundaryCondition, EdgeId, VertexId, WeightedGraph};
use crate::green::{green, green_with, GreenError, GreenOptions, TransferColumns, TransferKernel};
use crate::sandpile::{config_from_tree, minimal_prob, SandpileError};
use crate::dpp::WilsonSampler;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Dpp(#[from] DppError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Sandpile(#[from] SandpileError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("truncation bound {bound} exceeds the requested accuracy {target}")]
    Truncation { bound: f64, target: f64 },
    #[error("{0}")]
    Invalid(&'static str),
}

/// Dense-path cap used for the large grids below; the envelope factor is much
/// cheaper than a dense inverse there.
const LARGE_DENSE_LIMIT: usize = 1200;

/// Transfer current of the unit-conductance torus `(ℤ/n)ᵈ` from one Green
/// column, using translation invariance `G(x, y) = G(0, y − x)`. Edge ids
/// follow [`torus`]: `d·x + k` runs from `x` to `x + e_k`.
#[derive(Debug, Clone)]
pub struct TorusKernel {
    pub n: usize,
    pub d: usize,
    g0: Vec<f64>,
}

impl TorusKernel {
    pub fn new(n: usize, d: usize) -> Result<Self, FieldError> {
        let g = torus(n, d)?;
        let opts = GreenOptions { dense_limit: LARGE_DENSE_LIMIT };
        let gr = green_with(&g, BoundaryCondition::Free, opts)?;
        Ok(TorusKernel { n, d, g0: gr.column(0) })
    }

    pub fn graph(&self) -> WeightedGraph {
        torus(self.n, self.d).expect("validated in new")
    }

    pub fn edge_count(&self) -> usize {
        self.n.pow(self.d as u32) * self.d
    }

    pub fn coords(&self, mut x: VertexId) -> Vec<i64> {
        let mut c = vec![0; self.d];
        for ck in c.iter_mut() {
            *ck = (x % self.n) as i64;
            x /= self.n;
        }
        c
    }

    pub fn vertex(&self, c: &[i64]) -> VertexId {
        let n = self.n as i64;
        c.iter().rev().fold(0, |acc, &ck| acc * self.n + ck.rem_euclid(n) as usize)
    }

    /// Tail coordinates and axis of an edge.
    pub fn edge_parts(&self, e: EdgeId) -> (Vec<i64>, usize) {
        (self.coords(e / self.d), e % self.d)
    }

    pub fn edge(&self, c: &[i64], axis: usize) -> EdgeId {
        self.vertex(c) * self.d + axis
    }

    pub fn shift_edge(&self, e: EdgeId, off: &[i64]) -> EdgeId {
        let (c, k) = self.edge_parts(e);
        let s: Vec<i64> = c.iter().zip(off).map(|(a, b)| a + b).collect();
        self.edge(&s, k)
    }

    pub fn shift(&self, p: &Pattern, off: &[i64]) -> Pattern {
        Pattern {
            present: p.present.iter().map(|&e| self.shift_edge(e, off)).collect(),
            absent: p.absent.iter().map(|&e| self.shift_edge(e, off)).collect(),
        }
    }

    fn green(&self, x: &[i64], y: &[i64]) -> f64 {
        let diff: Vec<i64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        self.g0[self.vertex(&diff)]
    }

    /// Centroid of the edge midpoints in `[0, 1)ᵈ`, taken without wrapping
    /// the support and then reduced mod 1.
    pub fn location(&self, p: &Pattern) -> Vec<f64> {
        let sup = p.support();
        let mut c = vec![0.0; self.d];
        for &e in &sup {
            let (t, k) = self.edge_parts(e);
            for i in 0..self.d {
                c[i] += t[i] as f64 + if i == k { 0.5 } else { 0.0 };
            }
        }
        c.iter().map(|x| x / sup.len() as f64 / self.n as f64).map(|x| x - x.floor()).collect()
    }

    /// All torus offsets `[−⌊n/2⌋, n − ⌊n/2⌋)ᵈ` when `radius` covers the
    /// period, otherwise the box `[−R, R]ᵈ`.
    fn offsets(&self, radius: usize) -> (Vec<Vec<i64>>, bool) {
        let n = self.n as i64;
        let complete = 2 * radius + 1 >= self.n;
        let (lo, hi) = if complete { (-(n / 2), n - n / 2 - 1) } else { (-(radius as i64), radius as i64) };
        let mut out = Vec::new();
        let mut o = vec![lo; self.d];
        loop {
            out.push(o.clone());
            let mut i = 0;
            while i < self.d {
                o[i] += 1;
                if o[i] <= hi {
                    break;
                }
                o[i] = lo;
                i += 1;
            }
            if i == self.d {
                return (out, complete);
            }
        }
    }
}

impl TransferKernel for TorusKernel {
    fn t(&self, e: EdgeId, f: EdgeId) -> f64 {
        let (x, a) = self.edge_parts(e);
        let (u, b) = self.edge_parts(f);
        let mut y = x.clone();
        y[a] += 1;
        let mut v = u.clone();
        v[b] += 1;
        self.green(&x, &u) - self.green(&y, &u) - self.green(&x, &v) + self.green(&y, &v)
    }

    fn conductance(&self, _e: EdgeId) -> f64 {
        1.0
    }
}

/// `Cov(1_p, 1_q)` for any two patterns, overlapping or contradictory.
pub fn pattern_covariance<K: TransferKernel + ?Sized>(k: &K, p: &Pattern, q: &Pattern) -> Result<f64, DppError> {
    let pp = pattern_prob(k, p)?;
    let pq = pattern_prob(k, q)?;
    Ok(joint_prob(k, p, q)? - pp * pq)
}

fn joint_prob<K: TransferKernel + ?Sized>(k: &K, p: &Pattern, q: &Pattern) -> Result<f64, DppError> {
    let mut present = p.present.clone();
    let mut absent = p.absent.clone();
    for &e in &q.present {
        if absent.contains(&e) {
            return Ok(0.0);
        }
        if !present.contains(&e) {
            present.push(e);
        }
    }
    for &e in &q.absent {
        if present.contains(&e) {
            return Ok(0.0);
        }
        if !absent.contains(&e) {
            absent.push(e);
        }
    }
    pattern_prob(k, &Pattern { present, absent })
}

/// Normalised covariance sum with its truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intensity {
    pub value: f64,
    /// Bound on the neglected translates, from `|Cov| ≤ A r^{−2d}` fitted on
    /// the outermost shell. Zero when every translate on the torus was summed.
    pub tail_bound: f64,
    pub radius: usize,
    pub complete: bool,
}

/// `(|A⁰||B⁰|)^{−1/2} Σ_{x ∈ A⁰} Σ_{y ∈ Λ B⁰, |y − x|_∞ ≤ R} Cov(x, y)`.
pub fn cross_intensity(k: &TorusKernel, a: &[Pattern], b: &[Pattern], radius: usize) -> Result<Intensity, FieldError> {
    if a.is_empty() || b.is_empty() {
        return Err(FieldError::Invalid("empty base pattern family"));
    }
    let (offsets, complete) = k.offsets(radius);
    let mut total = 0.0;
    let mut shell_a: f64 = 0.0;
    for o in &offsets {
        let mut s = 0.0;
        for x in a {
            for y0 in b {
                s += pattern_covariance(k, x, &k.shift(y0, o))?;
            }
        }
        total += s;
        let on_shell = o.iter().map(|v| v.unsigned_abs() as usize).max() == Some(radius);
        if !complete && on_shell {
            let r2: f64 = o.iter().map(|&v| (v * v) as f64).sum();
            shell_a = shell_a.max(s.abs() * r2.powi(k.d as i32));
        }
    }
    let norm = ((a.len() * b.len()) as f64).sqrt();
    let d = k.d as f64;
    let tail = if complete { 0.0 } else { unit_sphere_area(k.d) * shell_a / (d * (radius as f64).powf(d)) };
    Ok(Intensity { value: total / norm, tail_bound: tail / norm, radius, complete })
}

pub fn intensity(k: &TorusKernel, base: &[Pattern], radius: usize) -> Result<Intensity, FieldError> {
    cross_intensity(k, base, base, radius)
}

/// [`intensity`] that fails when the truncation bound is above `target`.
pub fn intensity_to(k: &TorusKernel, base: &[Pattern], radius: usize, target: f64) -> Result<Intensity, FieldError> {
    let i = intensity(k, base, radius)?;
    if i.tail_bound > target {
        return Err(FieldError::Truncation { bound: i.tail_bound, target });
    }
    Ok(i)
}

/// `I(i, j)` for the fields of edges of type `i` and `j`, and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SumRule {
    pub matrix: Vec<Vec<f64>>,
    pub total: f64,
    pub tail_bound: f64,
    pub complete: bool,
}

pub fn edge_type_sum_rule(k: &TorusKernel, radius: usize) -> Result<SumRule, FieldError> {
    let origin = vec![0i64; k.d];
    let base = |i: usize| vec![Pattern::present(&[k.edge(&origin, i)])];
    let mut matrix = vec![vec![0.0; k.d]; k.d];
    let (mut total, mut tail, mut complete) = (0.0, 0.0, true);
    for i in 0..k.d {
        for j in 0..k.d {
            let r = cross_intensity(k, &base(i), &base(j), radius)?;
            matrix[i][j] = r.value;
            total += r.value;
            tail += r.tail_bound;
            complete &= r.complete;
        }
    }
    Ok(SumRule { matrix, total, tail_bound: tail, complete })
}

/// A finite family of patterns with weights `φ(location)`; its value on a
/// tree is `ξ(φ) = Σ φ(x) 1{x occurs}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternField {
    pub patterns: Vec<Pattern>,
    pub weights: Vec<f64>,
}

impl PatternField {
    /// Every torus translate of the base family, weighted by `φ` on `[0, 1)ᵈ`.
    pub fn on_torus(k: &TorusKernel, base: &[Pattern], phi: impl Fn(&[f64]) -> f64) -> PatternField {
        let (offsets, _) = k.offsets(k.n);
        let mut patterns = Vec::new();
        let mut weights = Vec::new();
        for o in &offsets {
            for b in base {
                let p = k.shift(b, o);
                weights.push(phi(&k.location(&p)));
                patterns.push(p);
            }
        }
        PatternField { patterns, weights }
    }

    pub fn value(&self, in_tree: &[bool]) -> f64 {
        self.patterns
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| p.occurs(|e| in_tree[e]))
            .map(|(_, w)| w)
            .sum()
    }

    pub fn exact_mean<K: TransferKernel + ?Sized>(&self, k: &K) -> Result<f64, FieldError> {
        let mut s = 0.0;
        for (p, w) in self.patterns.iter().zip(&self.weights) {
            s += w * pattern_prob(k, p)?;
        }
        Ok(s)
    }

    /// `Σ_{x,y} φ(x) φ(y) Cov(x, y)`, quadratic in the family size.
    pub fn exact_variance<K: TransferKernel + ?Sized>(&self, k: &K) -> Result<f64, FieldError> {
        let probs: Vec<f64> = self.patterns.iter().map(|p| pattern_prob(k, p)).collect::<Result<_, _>>()?;
        let mut s = 0.0;
        for (i, p) in self.patterns.iter().enumerate() {
            s += self.weights[i] * self.weights[i] * (probs[i] - probs[i] * probs[i]);
            for j in 0..i {
                let c = joint_prob(k, p, &self.patterns[j])? - probs[i] * probs[j];
                s += 2.0 * self.weights[i] * self.weights[j] * c;
            }
        }
        Ok(s)
    }
}

/// One draw of `ξ(φ)` from a fresh Wilson tree.
pub fn tree_field_draw<R: Rng + ?Sized>(field: &PatternField, sampler: &mut WilsonSampler, edge_count: usize, rng: &mut R) -> f64 {
    sampler.run(rng);
    field.value(&sampler.membership(edge_count))
}

/// `Σ_x φ(x) 1{h_x = 0}` over interior vertices of a wired graph, with the
/// sandpile configuration read off a uniform tree through the burning
/// bijection.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroHeightField {
    pub weights: Vec<(VertexId, f64)>,
}

impl ZeroHeightField {
    /// Every interior vertex, weighted by `φ` at its position.
    pub fn on_graph(g: &WeightedGraph, phi: impl Fn(&[f64]) -> f64) -> ZeroHeightField {
        ZeroHeightField { weights: g.interior().into_iter().map(|v| (v, phi(&g.vertex(v).pos))).collect() }
    }

    pub fn value(&self, heights: &[u32]) -> f64 {
        self.weights.iter().filter(|(v, _)| heights[*v] == 0).map(|(_, w)| w).sum()
    }

    pub fn draw<R: Rng + ?Sized>(&self, g: &WeightedGraph, sampler: &mut WilsonSampler, rng: &mut R) -> Result<f64, FieldError> {
        let tree = sampler.sample(rng);
        Ok(self.value(&config_from_tree(g, &tree)?))
    }

    /// `Σ φ(x) ν(h_x = 0)`.
    pub fn exact_mean(&self, g: &WeightedGraph) -> Result<f64, FieldError> {
        let sets: Vec<[VertexId; 1]> = self.weights.iter().map(|&(v, _)| [v]).collect();
        let refs: Vec<&[VertexId]> = sets.iter().map(|s| s.as_slice()).collect();
        let q = zero_probs(g, &refs)?;
        Ok(self.weights.iter().zip(&q).map(|((_, w), q)| w * q).sum())
    }
}

/// `∫_{[0,1]ᵈ} φ²` by the product midpoint rule with `m` cells per axis.
pub fn l2_norm_sq(d: usize, phi: impl Fn(&[f64]) -> f64, m: usize) -> f64 {
    let cells = m.pow(d as u32);
    let mut x = vec![0.0; d];
    let mut s = 0.0;
    for i in 0..cells {
        let mut r = i;
        for xk in x.iter_mut() {
            *xk = ((r % m) as f64 + 0.5) / m as f64;
            r /= m;
        }
        let v = phi(&x);
        s += v * v;
    }
    s / cells as f64
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 0 { 1.0 } else { p1 };
            dp = m as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// One row of the convergence table of `nᵈ T(e_n, f_n) / c(f_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TicvRow {
    pub n: usize,
    pub discrete: f64,
    pub continuum: f64,
    pub rel_error: f64,
}

fn unit_axis(d: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[k] = 1.0;
    v
}

/// Edge along `axis` whose midpoint is nearest `z`.
pub fn nearest_edge(grid: &Grid, z: &[f64], axis: usize) -> Option<EdgeId> {
    let nf = grid.n as f64;
    let k: Vec<i64> = z
        .iter()
        .enumerate()
        .map(|(i, &x)| if i == axis { (x * nf - 0.5).round() as i64 } else { (x * nf).round() as i64 })
        .collect();
    grid.edge_at(&k, axis)
}

/// Wired grids `ℤᵈ/n ∩ D` against the Dirichlet Green function of `D`: edges
/// along `axes.0` near `z` and `axes.1` near `w`, continuum derivative taken
/// at the actual edge midpoints.
pub fn ticv_convergence(
    domain: &DomainSpec,
    z: &[f64],
    w: &[f64],
    axes: (usize, usize),
    ns: &[usize],
) -> Result<Vec<TicvRow>, FieldError> {
    let cg = ContinuumGreen::new(domain.clone(), BoundaryCondition::Wired)?;
    let d = domain.dim();
    let mut rows = Vec::new();
    for &n in ns {
        let grid = grid_in_domain(domain, n, BoundaryCondition::Wired)?;
        let g = &grid.graph;
        let e = nearest_edge(&grid, z, axes.0).ok_or(FieldError::Invalid("no edge near z"))?;
        let f = nearest_edge(&grid, w, axes.1).ok_or(FieldError::Invalid("no edge near w"))?;
        let gr = green_with(g, BoundaryCondition::Wired, GreenOptions { dense_limit: LARGE_DENSE_LIMIT })?;
        let cols = TransferColumns::new(g, &gr, &[f]);
        let discrete = (n as f64).powi(d as i32) * cols.t(e, f) / g.conductance(f);
        let continuum = cg.mixed(&g.midpoint(e), &unit_axis(d, axes.0), &g.midpoint(f), &unit_axis(d, axes.1));
        rows.push(TicvRow { n, discrete, continuum, rel_error: ((discrete - continuum) / continuum).abs() });
    }
    Ok(rows)
}

/// Rectangle snapped to multiples of `1/n`, as half-open integer ranges of
/// `n·x`.
fn snap(b: &DomainSpec, n: usize) -> Result<(Vec<i64>, Vec<i64>), FieldError> {
    match b {
        DomainSpec::Rectangle { lo, hi } => {
            let nf = n as f64;
            let l: Vec<i64> = lo.iter().map(|x| (x * nf).round() as i64).collect();
            let h: Vec<i64> = hi.iter().map(|x| (x * nf).round() as i64).collect();
            if l.iter().zip(&h).any(|(a, b)| a >= b) {
                return Err(FieldError::Invalid("region is empty at this resolution"));
            }
            Ok((l, h))
        }
        _ => Err(FieldError::Invalid("regions must be rectangles")),
    }
}

/// Edges whose midpoint lies in the snapped region `[l, h)/n`.
fn edges_in(grid: &Grid, l: &[i64], h: &[i64]) -> Vec<EdgeId> {
    let g = &grid.graph;
    let nf = grid.n as f64;
    (0..g.edge_count())
        .filter(|&e| {
            let m = g.midpoint(e);
            m.iter().zip(l.iter().zip(h)).all(|(x, (&a, &b))| {
                let t = x * nf;
                t >= a as f64 - 1e-9 && t < b as f64 - 1e-9
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCov {
    pub n: usize,
    /// `Σ_{e ∈ B₁, f ∈ B₂} Cov(e, f)`.
    pub discrete: f64,
    /// `−∫_{B₁}∫_{B₂} ‖∂_z ∂_w g‖²_F` over the snapped regions.
    pub continuum: f64,
    pub edges: (usize, usize),
}

/// Covariance of the numbers of tree edges in two disjoint rectangles of a
/// wired grid in a planar rectangle, and its continuum limit.
pub fn edge_count_cov(domain: &DomainSpec, n: usize, b1: &DomainSpec, b2: &DomainSpec, quad: usize) -> Result<RegionCov, FieldError> {
    if b1 == b2 {
        return Err(FieldError::Invalid("regions must differ"));
    }
    let (l1, h1) = snap(b1, n)?;
    let (l2, h2) = snap(b2, n)?;
    if l1.iter().zip(&h1).zip(l2.iter().zip(&h2)).all(|((a1, b1), (a2, b2))| a1 < b2 && a2 < b1) {
        return Err(FieldError::Invalid("regions overlap"));
    }
    let grid = grid_in_domain(domain, n, BoundaryCondition::Wired)?;
    let g = &grid.graph;
    let e1 = edges_in(&grid, &l1, &h1);
    let e2 = edges_in(&grid, &l2, &h2);
    let gr = green_with(g, BoundaryCondition::Wired, GreenOptions { dense_limit: LARGE_DENSE_LIMIT })?;
    let cols = TransferColumns::new(g, &gr, &e2);
    let mut discrete = 0.0;
    for &e in &e1 {
        for &f in &e2 {
            discrete -= cols.t(e, f) * cols.t(f, e);
        }
    }
    let cg = ContinuumGreen::new(domain.clone(), BoundaryCondition::Wired)?;
    let nf = n as f64;
    let rect = |l: &[i64], h: &[i64]| -> (Vec<f64>, Vec<f64>) {
        (l.iter().map(|&x| x as f64 / nf).collect(), h.iter().map(|&x| x as f64 / nf).collect())
    };
    let continuum = -frobenius_integral(&cg, rect(&l1, &h1), rect(&l2, &h2), quad);
    Ok(RegionCov { n, discrete, continuum, edges: (e1.len(), e2.len()) })
}

/// `∫_{R₁}∫_{R₂} Σ_{a,b} (∂_{z_a} ∂_{w_b} g)²` by product Gauss-Legendre.
fn frobenius_integral(cg: &ContinuumGreen, r1: (Vec<f64>, Vec<f64>), r2: (Vec<f64>, Vec<f64>), m: usize) -> f64 {
    let nodes = gauss_legendre(m);
    let pts = |r: &(Vec<f64>, Vec<f64>)| {
        let mut out = Vec::new();
        let area = (r.1[0] - r.0[0]) * (r.1[1] - r.0[1]);
        for &(x, wx) in &nodes {
            for &(y, wy) in &nodes {
                out.push(([r.0[0] + x * (r.1[0] - r.0[0]), r.0[1] + y * (r.1[1] - r.0[1])], wx * wy * area));
            }
        }
        out
    };
    let (p1, p2) = (pts(&r1), pts(&r2));
    let axes = [[1.0, 0.0], [0.0, 1.0]];
    let mut s = 0.0;
    for (z, wz) in &p1 {
        for (w, ww) in &p2 {
            let mut f = 0.0;
            for a in &axes {
                for b in &axes {
                    let h = cg.mixed(z, a, w, b);
                    f += h * h;
                }
            }
            s += wz * ww * f;
        }
    }
    s
}

/// `P(h = 0)` on the whole lattice: `2/π² (1 − 2/π)`.
pub fn zero_height_target() -> f64 {
    2.0 / (PI * PI) * (1.0 - 2.0 / PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroHeight {
    pub n: usize,
    pub q: f64,
    pub target: f64,
    pub error: f64,
}

/// Probability of height zero at the central vertex of the wired grid
/// `ℤ²/n ∩ (0, 1)²` (interior `(n−1)×(n−1)`).
pub fn zero_height_center(n: usize) -> Result<ZeroHeight, FieldError> {
    let grid = grid_in_domain(&DomainSpec::unit_square(), n, BoundaryCondition::Wired)?;
    let half = (n / 2) as i64;
    let x = grid.vertex_at(&[half, half]).ok_or(FieldError::Invalid("grid has no centre"))?;
    let q = zero_probs(&grid.graph, &[&[x]])?[0];
    let target = zero_height_target();
    Ok(ZeroHeight { n, q, target, error: (q - target).abs() })
}

/// `ν(η = 0 on W)` for each set `W` of pairwise non-adjacent vertices,
/// sharing one Green factorisation.
pub fn zero_probs(g: &WeightedGraph, sets: &[&[VertexId]]) -> Result<Vec<f64>, FieldError> {
    let gr = green_with(g, BoundaryCondition::Wired, GreenOptions { dense_limit: LARGE_DENSE_LIMIT })?;
    let mut cols = TransferColumns::new(g, &gr, &[]);
    let mut out = Vec::new();
    for w in sets {
        let zeros = vec![0u32; w.len()];
        let m = crate::sandpile::minimal_edges(g, w, &zeros)?;
        for &e in &m.excluded {
            cols.add(g, &gr, e);
        }
        out.push(minimal_prob(g, &cols, w, &zeros)?);
    }
    Ok(out)
}

/// Both sides of `Σ_y Cov(1_x, 1_y) = ∂² log Z / ∂w ∂w₀` at `w = w₀ = 1`,
/// where conductances are multiplied by `w` on the family and by `w₀`
/// additionally on `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Susceptibility {
    pub cov_sum: f64,
    pub finite_difference: f64,
    pub step: f64,
}

impl Susceptibility {
    pub fn diff(&self) -> f64 {
        (self.cov_sum - self.finite_difference).abs()
    }
}

pub fn susceptibility_check(
    g: &WeightedGraph,
    bc: BoundaryCondition,
    x: EdgeId,
    family: &[EdgeId],
    step: f64,
) -> Result<Susceptibility, FieldError> {
    if !family.contains(&x) {
        return Err(FieldError::Invalid("the family must contain the pattern edge"));
    }
    let k = crate::green::transfer_current(g, bc)?;
    let mut cov_sum = 0.0;
    for &y in family {
        cov_sum += if y == x { k.t(x, x) * (1.0 - k.t(x, x)) } else { -k.t(x, y) * k.t(y, x) };
    }
    let log_z = |a: f64, b: f64| -> Result<f64, FieldError> {
        let mut c: Vec<f64> = g.edges().iter().map(|e| e.c).collect();
        for &y in family {
            c[y] *= 1.0 + a;
        }
        c[x] *= 1.0 + b;
        Ok(log_kappa(&g.with_conductances(&c).map_err(GreenError::from)?, bc)?)
    };
    let h = step;
    let fd = (log_z(h, h)? - log_z(h, -h)? - log_z(-h, h)? + log_z(-h, -h)?) / (4.0 * h * h);
    Ok(Susceptibility { cov_sum, finite_difference: fd, step })
}

/// Exact `T(e, e)` against `(2/π) θ_e` on an isoradial graph, worst case
/// per distinct half-angle.
pub fn isoradial_density_defect(g: &WeightedGraph, theta: &[f64]) -> Result<Vec<(f64, f64)>, FieldError> {
    let k = crate::green::transfer_current(g, BoundaryCondition::Free)?;
    let mut classes: Vec<(f64, f64)> = Vec::new();
    for e in 0..g.edge_count() {
        let err = (k.t(e, e) - 2.0 / PI * theta[e]).abs();
        match classes.iter_mut().find(|c| (c.0 - theta[e]).abs() < 1e-12) {
            Some(c) => c.1 = c.1.max(err),
            None => classes.push((theta[e], err)),
        }
    }
    classes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(classes)
}

/// Plain Green function handle, re-exported for experiments that need the
/// free torus column directly.
pub fn torus_green_column(n: usize, d: usize) -> Result<Vec<f64>, FieldError> {
    Ok(green(&torus(n, d)?, BoundaryCondition::Free)?.column(0))
}
