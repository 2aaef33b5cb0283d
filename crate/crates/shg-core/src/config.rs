//! The JSON run configuration read by `shgeq`.

use crate::equilibrium::{DensityConfig, NewtonConfig};
use crate::error::{domain, Result};
use crate::model::{derive_scales, ConvSign, ModelParams};
use crate::oracle::{OracleConfig, QuadConfig};
use crate::tba::GridConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub r: f64,
    pub b: f64,
    pub alpha: f64,
    pub n: u64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub conv_sign: ConvSign,
}

fn default_eta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub density: DensityConfig,
    pub newton: NewtonConfig,
    pub partition: QuadConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub tba: GridConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| crate::Error::Domain(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| crate::Error::Domain(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn params(&self) -> Result<ModelParams> {
        let m = &self.model;
        Ok(derive_scales(m.r, m.b, m.alpha, m.n, m.eta)?.with_sign(m.conv_sign))
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let positive = [
            ("tba.tol", self.tba.tol),
            ("quadrature.newton.tol", self.quadrature.newton.tol),
            ("quadrature.density.edge_floor", self.quadrature.density.edge_floor),
            ("quadrature.density.f_panel", self.quadrature.density.f_panel),
            ("quadrature.partition.margin", self.quadrature.partition.margin),
            ("oracle.threshold", self.oracle.threshold),
            ("oracle.tol", self.oracle.tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some(l) = self.tba.half_width {
            if !(l > 0.0) {
                return domain("tba.half_width must be positive");
            }
        }
        let d = &self.quadrature.density;
        if !(d.offset > 0.0 && d.offset < 1.0) {
            return domain("quadrature.density.offset must lie in (0, 1)");
        }
        if d.points < 16 || d.gl_order < 2 {
            return domain("quadrature.density needs points >= 16 and gl_order >= 2");
        }
        if self.tba.points < 16 || self.tba.max_iter == 0 {
            return domain("tba needs points >= 16 and max_iter >= 1");
        }
        if self.oracle.nodes < 400 {
            return domain("oracle.nodes must be at least 400");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = RunConfig::from_json(r#"{"model": {"r": 10, "b": 1, "alpha": 0.5, "n": 1000}}"#).unwrap();
        assert_eq!(c.model.eta, 0.1);
        assert_eq!(c.tba, GridConfig::default());
        assert_eq!(c.oracle.nodes, 800);
        assert_eq!(c.output.dir, PathBuf::from("out"));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_json(r#"{"model": {"r": 0, "b": 1, "alpha": 0, "n": 1000}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model": {"r": 1, "b": 1, "alpha": 0, "n": 1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model": {"r": 1, "b": 1, "alpha": 0, "n": 10}, "tba": {"tol": 0}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model": {"r": 1, "b": 1, "alpha": 0, "n": 10}, "typo": 1}"#).is_err());
    }
}
