use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;

use super::{BuildError, DomainSpec};
use crate::graph::BoundaryCondition;

/// Green function of `−Δ` on a domain (Dirichlet, or the whole space), and
/// its mixed directional derivative `∂_u^z ∂_v^w g(z, w)`.
///
/// Rectangle: sine series in the coordinate across which `z` and `w` are
/// farther apart, with the other coordinate solved in closed form, so terms
/// decay like `e^{−kπ|Δ|/L}`. Disk: image charge. Whole space: `−log r / 2π`
/// in the plane, `r^{2−d} / ((d−2)|S^{d−1}|)` above.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumGreen {
    domain: DomainSpec,
}

/// Relative size below which series terms are dropped.
const SERIES_TOL: f64 = 1e-17;
const MAX_TERMS: usize = 2_000_000;

impl ContinuumGreen {
    pub fn new(domain: DomainSpec, bc: BoundaryCondition) -> Result<Self, BuildError> {
        domain.validate()?;
        match (&domain, bc) {
            (DomainSpec::FullSpace { .. }, _) => {}
            (DomainSpec::Rectangle { lo, .. }, BoundaryCondition::Wired) if lo.len() == 2 => {}
            (DomainSpec::Disk { .. }, BoundaryCondition::Wired) => {}
            _ => return Err(BuildError::Unsupported),
        }
        Ok(ContinuumGreen { domain })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn value(&self, z: &[f64], w: &[f64]) -> f64 {
        match &self.domain {
            DomainSpec::FullSpace { dim } => full_space_value(*dim, z, w),
            DomainSpec::Disk { center, radius } => {
                let a = Complex64::new((z[0] - center[0]) / radius, (z[1] - center[1]) / radius);
                let b = Complex64::new((w[0] - center[0]) / radius, (w[1] - center[1]) / radius);
                -((a - b) / (Complex64::new(1.0, 0.0) - a * b.conj())).norm().ln() / (2.0 * PI)
            }
            DomainSpec::Rectangle { lo, hi } => rect_series(lo, hi, z, w).0,
        }
    }

    /// `∂_u^z ∂_v^w g(z, w)` for unit (or any) direction vectors `u`, `v`.
    pub fn mixed(&self, z: &[f64], u: &[f64], w: &[f64], v: &[f64]) -> f64 {
        match &self.domain {
            DomainSpec::FullSpace { dim } => full_space_mixed(*dim, z, u, w, v),
            DomainSpec::Disk { center, radius } => {
                let a = Complex64::new((z[0] - center[0]) / radius, (z[1] - center[1]) / radius);
                let b = Complex64::new((w[0] - center[0]) / radius, (w[1] - center[1]) / radius);
                let uc = Complex64::new(u[0], u[1]);
                let vc = Complex64::new(v[0], v[1]);
                let one = Complex64::new(1.0, 0.0);
                let s = (uc * vc / ((a - b) * (a - b))).re + (uc * vc.conj() / ((one - a * b.conj()).powi(2))).re;
                -s / (2.0 * PI * radius * radius)
            }
            DomainSpec::Rectangle { lo, hi } => {
                let h = rect_series(lo, hi, z, w).1;
                let mut s = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        s += u[i] * v[j] * h[i][j];
                    }
                }
                s
            }
        }
    }
}

pub fn unit_sphere_area(d: usize) -> f64 {
    // |S^{d−1}| = 2 π^{d/2} / Γ(d/2)
    let half = d as f64 / 2.0;
    let mut gamma = if d % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if d % 2 == 0 { 1.0 } else { 0.5 };
    while x < half {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(half) / gamma
}

fn full_space_value(d: usize, z: &[f64], w: &[f64]) -> f64 {
    let r = z.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if d == 2 {
        -r.ln() / (2.0 * PI)
    } else {
        r.powi(2 - d as i32) / ((d as f64 - 2.0) * unit_sphere_area(d))
    }
}

/// Mixed derivative of the whole-space Green function.
pub fn full_space_mixed(d: usize, z: &[f64], u: &[f64], w: &[f64], v: &[f64]) -> f64 {
    let r: Vec<f64> = z.iter().zip(w).map(|(a, b)| a - b).collect();
    let r2: f64 = r.iter().map(|x| x * x).sum();
    let ru: f64 = r.iter().zip(u).map(|(a, b)| a * b).sum();
    let rv: f64 = r.iter().zip(v).map(|(a, b)| a * b).sum();
    let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    if d == 2 {
        -(-uv / r2 + 2.0 * ru * rv / (r2 * r2)) / (2.0 * PI)
    } else {
        let df = d as f64;
        let c = 1.0 / ((df - 2.0) * unit_sphere_area(d));
        let rd = r2.sqrt().powi(-(d as i32));
        c * (2.0 - df) * (-uv * rd + df * ru * rv * rd / r2)
    }
}

/// Dirichlet Green function of `(lo, hi)` and its mixed Hessian
/// `H[i][j] = ∂_{z_i} ∂_{w_j} g`.
fn rect_series(lo: &[f64], hi: &[f64], z: &[f64], w: &[f64]) -> (f64, [[f64; 2]; 2]) {
    // expand in sines along axis `s`, solve along axis `t`
    let (s, t) = if (z[1] - w[1]).abs() >= (z[0] - w[0]).abs() { (0, 1) } else { (1, 0) };
    let a = hi[s] - lo[s];
    let b = hi[t] - lo[t];
    let (x, xp) = (z[s] - lo[s], w[s] - lo[s]);
    let (y, yp) = (z[t] - lo[t], w[t] - lo[t]);
    let z_low = y <= yp;
    let (lo_t, hi_t) = if z_low { (y, yp) } else { (yp, y) };

    let mut g = 0.0;
    // h[ss], h[st], h[ts], h[tt] with first index for z, second for w
    let mut hss = 0.0;
    let mut hst = 0.0;
    let mut hts = 0.0;
    let mut htt = 0.0;
    for m in 1..=MAX_TERMS {
        let k = m as f64 * PI / a;
        let (sx, cx) = (k * x).sin_cos();
        let (sxp, cxp) = (k * xp).sin_cos();
        let norm = 2.0 / a;
        let e_gap = (-k * (hi_t - lo_t)).exp();
        let e_lo = (-2.0 * k * lo_t).exp();
        let e_hi = (-2.0 * k * (b - hi_t)).exp();
        let base = 0.5 * e_gap / (1.0 - (-2.0 * k * b).exp());
        let gm = base * (1.0 - e_lo) * (1.0 - e_hi) / k;
        let d_lo = base * (1.0 + e_lo) * (1.0 - e_hi);
        let d_hi = -base * (1.0 - e_lo) * (1.0 + e_hi);
        let d_lohi = -k * base * (1.0 + e_lo) * (1.0 + e_hi);
        let (dz, dw) = if z_low { (d_lo, d_hi) } else { (d_hi, d_lo) };

        let tg = norm * sx * sxp * gm;
        let tss = norm * k * k * cx * cxp * gm;
        let tst = norm * k * cx * sxp * dw;
        let tts = norm * k * sx * cxp * dz;
        let ttt = norm * sx * sxp * d_lohi;
        g += tg;
        hss += tss;
        hst += tst;
        hts += tts;
        htt += ttt;
        let scale = hss.abs() + hst.abs() + hts.abs() + htt.abs() + g.abs();
        let bound = norm * (k * k + k + 1.0) * e_gap * 2.0 / (1.0 - (-2.0 * k * b).exp()).max(0.5) * (1.0 + 1.0 / k);
        if m > 4 && bound < SERIES_TOL * scale.max(1e-300) {
            break;
        }
    }
    let mut h = [[0.0; 2]; 2];
    h[s][s] = hss;
    h[s][t] = hst;
    h[t][s] = hts;
    h[t][t] = htt;
    (g, h)
}
