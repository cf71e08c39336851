//! Sample moments and batch-means standard errors.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods in test builds
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `m₃ / m₂^{3/2}` with central sample moments.
    pub skewness: f64,
    /// `m₄ / m₂² − 3`.
    pub excess_kurtosis: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = if xs.len() > 1 { m2 / (n - 1.0) } else { 0.0 };
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let (skewness, excess_kurtosis) = if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0) } else { (0.0, 0.0) };
    Moments { count: xs.len(), mean, variance, skewness, excess_kurtosis }
}

/// A statistic of the full sample with a standard error from the spread of
/// the same statistic over consecutive batches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchEstimate {
    pub value: f64,
    pub std_error: f64,
    pub batches: usize,
}

pub fn batch_estimate(xs: &[f64], batches: usize, stat: impl Fn(&[f64]) -> f64) -> BatchEstimate {
    let value = stat(xs);
    let size = xs.len() / batches.max(1);
    if batches < 2 || size < 2 {
        return BatchEstimate { value, std_error: f64::NAN, batches };
    }
    let per: Vec<f64> = xs.chunks_exact(size).take(batches).map(&stat).collect();
    let m = moments(&per);
    BatchEstimate { value, std_error: (m.variance / batches as f64).sqrt(), batches }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp1, StandardNormal};

    #[test]
    fn known_moments() {
        let m = moments(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!(m.skewness.abs() < 1e-15);
        assert!((m.excess_kurtosis - (2.5625 / 1.5625 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn normal_and_exponential_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..200_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let m = moments(&xs);
        assert!(m.skewness.abs() < 0.02 && m.excess_kurtosis.abs() < 0.05);
        let ys: Vec<f64> = (0..200_000).map(|_| Exp1.sample(&mut rng)).collect();
        let m = moments(&ys);
        assert!((m.skewness - 2.0).abs() < 0.1 && (m.excess_kurtosis - 6.0).abs() < 0.8);
        let b = batch_estimate(&xs, 20, |s| moments(s).mean);
        assert!((b.std_error - 1.0 / 200_000f64.sqrt()).abs() < 1e-3);
    }
}
