//! Plain-text (TOML) configuration of field experiments.
//!
//! ```toml
//! graph = "torus"            # torus | grid
//! pattern = "horizontal-edge" # horizontal-edge | vertical-edge | all-edges | zero-height
//! n = 32                     # torus side, or grid resolution (interior (n-1)^2)
//! samples = 10000
//! seed = 7
//! phi = "cos-sin"            # one | cos-sin | tanh | cos
//! ```
//!
//! Optional keys: `dim` (2), `radius` (intensity truncation, default the
//! whole torus), `cross` (second pattern for cross-intensities) and a
//! `[thresholds]` table with `skewness`, `kurtosis` and `variance_rel`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use ustfield_core::dpp::Pattern;
use ustfield_core::fields::TorusKernel;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Torus,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternKind {
    HorizontalEdge,
    VerticalEdge,
    AllEdges,
    ZeroHeight,
}

impl PatternKind {
    /// Base family inside one torus cell.
    pub fn base(self, k: &TorusKernel) -> Result<Vec<Pattern>, CliError> {
        let o = vec![0i64; k.d];
        let single = |axis: usize| Pattern::present(&[k.edge(&o, axis)]);
        match self {
            PatternKind::HorizontalEdge => Ok(vec![single(0)]),
            PatternKind::VerticalEdge if k.d > 1 => Ok(vec![single(1)]),
            PatternKind::AllEdges => Ok((0..k.d).map(single).collect()),
            _ => Err(CliError::validation(format!("pattern {self:?} is not a torus edge pattern"))),
        }
    }
}

/// Test functions on `[0, 1]ᵈ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phi {
    One,
    /// `cos 2πx + ½ sin 2πy`.
    CosSin,
    /// `cos 2πx`.
    Cos,
    /// `tanh(4(x − ½))`, odd under `x ↦ 1 − x`.
    Tanh,
}

impl Phi {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Phi::One => 1.0,
            Phi::CosSin => (2.0 * PI * x[0]).cos() + 0.5 * x.get(1).map_or(0.0, |y| (2.0 * PI * y).sin()),
            Phi::Cos => (2.0 * PI * x[0]).cos(),
            Phi::Tanh => (4.0 * (x[0] - 0.5)).tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub skewness: f64,
    pub kurtosis: f64,
    pub variance_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { skewness: 0.1, kurtosis: 0.2, variance_rel: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub graph: GraphKind,
    pub pattern: PatternKind,
    pub n: usize,
    #[serde(default = "two")]
    pub dim: usize,
    #[serde(default)]
    pub samples: usize,
    pub seed: Option<u64>,
    #[serde(default = "default_phi")]
    pub phi: Phi,
    pub radius: Option<usize>,
    pub cross: Option<PatternKind>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn two() -> usize {
    2
}

fn default_phi() -> Phi {
    Phi::One
}

impl FieldConfig {
    pub fn parse(text: &str) -> Result<FieldConfig, CliError> {
        let cfg: FieldConfig = toml::from_str(text).map_err(|e| CliError::validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n < 2 {
            return Err(CliError::validation("config: n must be at least 2"));
        }
        if !(1..=3).contains(&self.dim) {
            return Err(CliError::validation("config: dim must be 1, 2 or 3"));
        }
        let zero = self.pattern == PatternKind::ZeroHeight;
        if zero != (self.graph == GraphKind::Grid) {
            return Err(CliError::validation("config: zero-height patterns live on grids, edge patterns on tori"));
        }
        if zero && self.dim != 2 {
            return Err(CliError::validation("config: zero-height fields are two-dimensional"));
        }
        Ok(())
    }

    /// The seed from the command line, or else from the file; one of them
    /// is required.
    pub fn seed_or(&self, cli: Option<u64>) -> Result<u64, CliError> {
        cli.or(self.seed).ok_or_else(|| CliError::validation("randomized command needs --seed (or `seed` in the config)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let c = FieldConfig::parse("graph = \"torus\"\npattern = \"horizontal-edge\"\nn = 8\nsamples = 10\nseed = 3\nphi = \"cos-sin\"\n").unwrap();
        assert_eq!(c.phi, Phi::CosSin);
        assert_eq!(c.thresholds, Thresholds::default());
        assert_eq!(c.seed_or(Some(5)).unwrap(), 5);
        assert!(FieldConfig::parse("graph = \"torus\"\npattern = \"zero-height\"\nn = 8\n").is_err());
        assert!(FieldConfig::parse("graph = \"torus\"\npattern = \"all-edges\"\nn = 8\ncolour = 1\n").is_err());
    }
}
