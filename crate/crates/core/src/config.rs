//! Experiment configuration: a single JSON document.

use crate::convergence::Region;
use crate::currents::TestFunction;
use crate::error::{Error, Result};
use crate::hash::fnv1a64;
use crate::model::ModelSpec;
use crate::quadrature::QuadratureConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Smallest Monte Carlo sample count accepted for the `sz_*` experiments.
pub const MIN_SZ_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Bergman,
    FsIdentity,
    WeakConvergence,
    SzExpectation,
    SzVariance,
    SzSequence,
    ZerosCdf,
    BandFit,
    CurrentCalculus,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Bergman,
        Experiment::FsIdentity,
        Experiment::WeakConvergence,
        Experiment::SzExpectation,
        Experiment::SzVariance,
        Experiment::SzSequence,
        Experiment::ZerosCdf,
        Experiment::BandFit,
        Experiment::CurrentCalculus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Bergman => "bergman",
            Experiment::FsIdentity => "fs_identity",
            Experiment::WeakConvergence => "weak_convergence",
            Experiment::SzExpectation => "sz_expectation",
            Experiment::SzVariance => "sz_variance",
            Experiment::SzSequence => "sz_sequence",
            Experiment::ZerosCdf => "zeros_cdf",
            Experiment::BandFit => "band_fit",
            Experiment::CurrentCalculus => "current_calculus",
        }
    }

    pub fn is_sz(&self) -> bool {
        matches!(self, Experiment::SzExpectation | Experiment::SzVariance | Experiment::SzSequence)
    }

    /// Whether the experiment consumes Monte Carlo zero samples.
    pub fn needs_samples(&self) -> bool {
        matches!(self, Experiment::SzExpectation | Experiment::SzVariance | Experiment::ZerosCdf)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    /// Samples per `p`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    200
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            samples: default_samples(),
            seed: 0,
        }
    }
}

fn default_probes() -> usize {
    200
}

fn default_band_radius() -> f64 {
    0.1
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

fn default_sequence() -> Vec<u32> {
    vec![8, 16, 32, 64]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `twist_canonical` here selects the sections of `L^p (x) K`.
    pub model: ModelSpec,
    pub p_grid: Vec<u32>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    /// Test functions; the model's default bank when absent.
    #[serde(default)]
    pub bank: Option<Vec<TestFunction>>,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    pub experiments: Vec<Experiment>,
    /// Probe count for the Bergman kernel tables.
    #[serde(default = "default_probes")]
    pub probes: usize,
    /// Region of the L1 norm and of the band-fit probes; whole sphere when absent.
    #[serde(default)]
    pub region: Option<Region>,
    #[serde(default = "default_band_radius")]
    pub band_radius: f64,
    /// `p` values of the single-sample sequence experiment.
    #[serde(default = "default_sequence")]
    pub sequence_p: Vec<u32>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.quadrature.validate()?;
        if self.p_grid.is_empty() {
            return Err(Error::Config("p_grid is empty".into()));
        }
        if self.p_grid.contains(&0) {
            return Err(Error::Config("p_grid entries must be positive".into()));
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("p_grid must be strictly ascending".into()));
        }
        if self.experiments.is_empty() {
            return Err(Error::Config("no experiments selected".into()));
        }
        if self.experiments.iter().any(Experiment::is_sz) && self.monte_carlo.samples < MIN_SZ_SAMPLES {
            return Err(Error::Config(format!(
                "sz experiments need at least {MIN_SZ_SAMPLES} samples per p, got {}",
                self.monte_carlo.samples
            )));
        }
        if self.experiments.iter().any(Experiment::needs_samples) && self.monte_carlo.samples == 0 {
            return Err(Error::Config("zero statistics need samples".into()));
        }
        if self.experiments.contains(&Experiment::SzSequence)
            && (self.sequence_p.is_empty() || self.sequence_p.contains(&0))
        {
            return Err(Error::Config("sequence_p must be non-empty and positive".into()));
        }
        if self.probes == 0 {
            return Err(Error::Config("probes must be positive".into()));
        }
        if !(self.band_radius > 0.0 && self.band_radius.is_finite()) {
            return Err(Error::Config("band_radius must be positive".into()));
        }
        if let Some(r) = self.region {
            if !(r.inner >= 0.0 && r.outer > r.inner) {
                return Err(Error::Config(format!("invalid region {r:?}")));
            }
        }
        if let Some(bank) = &self.bank {
            if bank.is_empty() {
                return Err(Error::Config("bank is empty".into()));
            }
        }
        Ok(())
    }

    /// Experiments in dependency order, deduplicated.
    pub fn ordered_experiments(&self) -> Vec<Experiment> {
        Experiment::ALL
            .into_iter()
            .filter(|e| self.experiments.contains(e))
            .collect()
    }

    /// JSON with object keys sorted recursively. The output directory is
    /// left out: it does not affect any artifact.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("outputs");
        }
        serde_json::to_string(&sort_keys(v)).expect("value serializes")
    }

    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical_json().as_bytes())
    }
}

fn sort_keys(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sort_keys(v))).collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{"model": {"kind": "FS_SPHERE"}, "p_grid": [4], "experiments": ["bergman"]}"#
    }

    #[test]
    fn minimal_config_parses() {
        let c = ExperimentConfig::from_json(minimal()).unwrap();
        assert_eq!(c.p_grid, vec![4]);
        assert_eq!(c.probes, 200);
        assert_eq!(c.quadrature, QuadratureConfig::default());
    }

    #[test]
    fn sz_needs_enough_samples() {
        let t = r#"{"model": {"kind": "FS_SPHERE"}, "p_grid": [4], "experiments": ["sz_expectation"],
                    "monte_carlo": {"samples": 10, "seed": 1}}"#;
        let e = ExperimentConfig::from_json(t).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn unsorted_grid_and_unknown_fields_are_rejected() {
        let t = r#"{"model": {"kind": "FS_SPHERE"}, "p_grid": [8, 4], "experiments": ["bergman"]}"#;
        assert!(ExperimentConfig::from_json(t).is_err());
        let t = r#"{"model": {"kind": "FS_SPHERE"}, "p_grid": [4], "experiments": ["bergman"], "typo": 1}"#;
        assert!(ExperimentConfig::from_json(t).is_err());
        let t = r#"{"model": {"kind": "FS_SPHERE"}, "p_grid": [4], "experiments": ["nope"]}"#;
        assert!(ExperimentConfig::from_json(t).is_err());
    }

    #[test]
    fn hash_ignores_key_order() {
        let a = ExperimentConfig::from_json(minimal()).unwrap();
        let b = ExperimentConfig::from_json(
            r#"{"experiments": ["bergman"], "p_grid": [4], "model": {"kind": "FS_SPHERE"}}"#,
        )
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        assert!(a.canonical_json().starts_with(r#"{"band_radius""#));
    }
}
