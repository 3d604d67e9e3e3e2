//! Run configuration: one TOML file with flat sections, canonicalized and
//! hashed so every output can be traced back to it.
//!
//! ```toml
//! [run]
//! base_seed = 42
//! horizon = 1.0
//! finest_n = 8192
//! replicates = 200
//!
//! [model]
//! sigma = "sin+2"
//! drift = "sin_x_cos_s"
//! x0 = 0.5
//!
//! [driver]
//! kind = "wiener"
//!
//! [rate]
//! epsilons = [0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625]
//! hypothesis = 0.3333333333333333
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog;
use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::noise::DriverSpec;
use crate::solver::ModelSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub run: RunSection,
    pub model: ModelSection,
    #[serde(default)]
    pub driver: DriverSection,
    #[serde(default)]
    pub rate: RateSection,
    #[serde(default)]
    pub a4: A4Section,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub base_seed: u64,
    pub horizon: f64,
    pub finest_n: usize,
    pub replicates: usize,
    pub substeps: usize,
    pub jobs: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            base_seed: 0,
            horizon: 1.0,
            finest_n: 1 << 13,
            replicates: 200,
            substeps: 1,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub sigma: String,
    pub drift: String,
    #[serde(default)]
    pub x0: f64,
    /// Use the drift family's closed-form mean; `false` forces quadrature.
    #[serde(default = "yes")]
    pub analytic_mean: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriverSection {
    pub kind: String,
    pub hurst: Option<f64>,
    pub kernel: Option<String>,
    pub a: f64,
    pub b: f64,
    pub base_points: usize,
}

impl Default for DriverSection {
    fn default() -> Self {
        Self {
            kind: "wiener".into(),
            hurst: None,
            kernel: None,
            a: 0.0,
            b: 1.0,
            base_points: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateSection {
    pub epsilons: Vec<f64>,
    pub hypothesis: f64,
    pub ito_crosscheck: bool,
    pub ito_epsilon: f64,
    pub svg: bool,
    /// Replace solver errors by `eps^p` exactly (pipeline self-test).
    pub synthetic_exponent: Option<f64>,
}

impl Default for RateSection {
    fn default() -> Self {
        Self {
            epsilons: (3..=8).map(|k| 0.5f64.powi(k)).collect(),
            hypothesis: 1.0 / 3.0,
            ito_crosscheck: false,
            ito_epsilon: 0.25,
            svg: false,
            synthetic_exponent: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct A4Section {
    pub probes: Vec<f64>,
    pub r_max: f64,
    pub threshold: f64,
}

impl Default for A4Section {
    fn default() -> Self {
        Self {
            probes: vec![-1.5, -0.5, 0.5, 1.5],
            r_max: 1e3,
            threshold: 0.01,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical JSON: defaults filled in, fixed key order.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn model(&self) -> Result<ModelSpec> {
        let mut drift = catalog::drift(&self.model.drift)?;
        if !self.model.analytic_mean {
            drift = drift.without_mean();
        }
        Ok(ModelSpec::new(
            catalog::diffusion(&self.model.sigma)?,
            drift,
            self.model.x0,
        ))
    }

    pub fn driver(&self) -> Result<DriverSpec> {
        let d = &self.driver;
        let hurst = || {
            d.hurst
                .ok_or_else(|| Error::Config(format!("driver '{}' needs a hurst index", d.kind)))
        };
        Ok(match d.kind.as_str() {
            "wiener" => DriverSpec::Wiener,
            "fbm" => DriverSpec::Fbm { hurst: hurst()? },
            "subfbm" => DriverSpec::SubFbm { hurst: hurst()? },
            "deterministic" => DriverSpec::Deterministic,
            "composite" => {
                let name = d.kernel.as_deref().unwrap_or("t_sin_x");
                DriverSpec::Composite {
                    kernel: catalog::kernel(name, d.a, d.b)?,
                    base_points: d.base_points,
                }
            }
            other => return Err(Error::Config(format!("unknown driver '{other}'"))),
        })
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            model: self.model()?,
            driver: self.driver()?,
            horizon: self.run.horizon,
            finest_n: self.run.finest_n,
            epsilons: self.rate.epsilons.clone(),
            replicates: self.run.replicates,
            base_seed: self.run.base_seed,
            rate_exponent_hypothesis: self.rate.hypothesis,
            substeps: self.run.substeps,
            jobs: self.run.jobs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[model]\nsigma = \"sin+2\"\ndrift = \"cos_s\"\n";

    #[test]
    fn defaults_fill_in() {
        let c = Config::from_toml(MINIMAL).unwrap();
        assert_eq!(c.run.finest_n, 8192);
        assert_eq!(c.rate.epsilons.len(), 6);
        assert_eq!(c.driver.kind, "wiener");
        assert!(c.experiment().unwrap().validate().is_ok());
    }

    #[test]
    fn hash_ignores_formatting_and_explicit_defaults() {
        let a = Config::from_toml(MINIMAL).unwrap();
        let b = Config::from_toml(
            "# comment\n[driver]\nkind = 'wiener'\n\n[model]\ndrift = \"cos_s\"\n  sigma   = \"sin+2\"\nx0 = 0.0\n",
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = Config::from_toml(&format!("{MINIMAL}x0 = 0.1\n")).unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn unknown_keys_and_names_rejected() {
        assert!(Config::from_toml(&format!("{MINIMAL}colour = 1\n")).is_err());
        let c = Config::from_toml("[model]\nsigma = \"cube\"\ndrift = \"cos_s\"\n").unwrap();
        assert!(c.model().is_err());
        let c = Config::from_toml(&format!("{MINIMAL}[driver]\nkind = \"fbm\"\n")).unwrap();
        assert!(c.driver().is_err());
    }

    #[test]
    fn analytic_mean_switch() {
        let c = Config::from_toml(
            "[model]\nsigma = \"sin+2\"\ndrift = \"decaying_sin_x\"\nanalytic_mean = false\n",
        )
        .unwrap();
        assert!(!c.model().unwrap().drift.has_average());
    }
}
