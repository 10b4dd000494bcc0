//! Run configuration: a JSON document mirroring the pipeline inputs, plus
//! command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use swarmsel_core::{FitScope, FitnessEvalMode, ModelFamily, ModelSpec, SwarmConfig};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub path: PathBuf,
    pub label_column: String,
    pub positive_label: String,
    #[serde(default)]
    pub drop_columns: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub test_fraction: f64,
    pub fit_scope: FitScope,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            fit_scope: FitScope::Full,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelEntry {
    pub family: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hyperparameters: BTreeMap<String, f64>,
    /// Omitted: the run seed is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub preprocess: PreprocessConfig,
    pub models: Vec<ModelEntry>,
    pub swarm: SwarmConfig,
    pub cv_folds: usize,
    pub seed: u64,
    /// Seeds for the optimization sweep; defaults to `[seed]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_sweep: Option<Vec<u64>>,
    pub top_n_crossval: usize,
    /// Background rows for the attribution stage.
    pub explain_background: usize,
    /// Where artifacts land. Invocation environment, like `--jobs`: excluded
    /// from the config echo so reports stay byte-comparable across
    /// directories.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig {
                path: PathBuf::from("data/wdbc.csv"),
                label_column: "diagnosis".into(),
                positive_label: "M".into(),
                drop_columns: vec!["id".into()],
            },
            preprocess: PreprocessConfig::default(),
            models: Vec::new(),
            swarm: SwarmConfig::default(),
            cv_folds: 10,
            seed: 42,
            seed_sweep: None,
            top_n_crossval: 5,
            explain_background: 100,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub eval_mode: Option<FitnessEvalMode>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &overrides.out {
            cfg.output_dir = out.clone();
        }
        if let Some(mode) = overrides.eval_mode {
            cfg.swarm.fitness_eval_mode = mode;
        }
        cfg.swarm.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.models.is_empty() {
            return Err(CliError::Config("config lists no models".into()));
        }
        for entry in &self.models {
            ModelFamily::parse(&entry.family).map_err(|e| CliError::Config(e.to_string()))?;
        }
        let mut names: Vec<&str> = self.models.iter().map(|m| m.family.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.models.len() {
            return Err(CliError::Config("duplicate model family in config".into()));
        }
        if !(self.preprocess.test_fraction > 0.0 && self.preprocess.test_fraction < 1.0) {
            return Err(CliError::Config(format!(
                "test_fraction must be in (0,1), got {}",
                self.preprocess.test_fraction
            )));
        }
        if self.cv_folds < 2 {
            return Err(CliError::Config("cv_folds must be >= 2".into()));
        }
        if self.top_n_crossval < 1 {
            return Err(CliError::Config("top_n_crossval must be >= 1".into()));
        }
        if self.explain_background < 1 {
            return Err(CliError::Config("explain_background must be >= 1".into()));
        }
        if let Some(sweep) = &self.seed_sweep {
            if sweep.is_empty() {
                return Err(CliError::Config("seed_sweep must not be empty".into()));
            }
        }
        // the k_max-vs-feature-count check needs the data, so it runs at load
        let mut probe = self.swarm.clone();
        probe.seed = self.seed;
        probe
            .validate(usize::MAX)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    /// Seeds of the optimization sweep runs.
    pub fn sweep_seeds(&self) -> Vec<u64> {
        self.seed_sweep.clone().unwrap_or_else(|| vec![self.seed])
    }

    /// Model spec for non-sweep stages (baseline, CV, explain).
    pub fn model_spec(&self, entry: &ModelEntry) -> Result<ModelSpec, CliError> {
        let family =
            ModelFamily::parse(&entry.family).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(ModelSpec {
            family,
            hyperparameters: entry.hyperparameters.clone(),
            seed: entry.seed.unwrap_or(self.seed),
        })
    }

    /// Model spec for one sweep run: unseeded entries follow the sweep seed.
    pub fn model_spec_for_seed(
        &self,
        entry: &ModelEntry,
        seed: u64,
    ) -> Result<ModelSpec, CliError> {
        let mut spec = self.model_spec(entry)?;
        if entry.seed.is_none() {
            spec.seed = seed;
        }
        Ok(spec)
    }

    /// Swarm configuration for one sweep run.
    pub fn swarm_for_seed(&self, seed: u64) -> SwarmConfig {
        let mut swarm = self.swarm.clone();
        swarm.seed = seed;
        swarm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> String {
        r#"{
            "dataset": {
                "path": "data/wdbc.csv",
                "label_column": "diagnosis",
                "positive_label": "M",
                "drop_columns": ["id"]
            },
            "models": [{ "family": "logistic" }, { "family": "knn" }]
        }"#
        .to_string()
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let dir = std::env::temp_dir().join("swarmsel_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("minimal.json");
        std::fs::write(&path, minimal_json()).unwrap();
        let cfg = RunConfig::load(&path, &Overrides::default()).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.cv_folds, 10);
        assert_eq!(cfg.swarm.population, 20);
        assert_eq!(cfg.swarm.iterations, 25);
        assert_eq!(cfg.sweep_seeds(), vec![42]);
    }

    #[test]
    fn unknown_family_is_a_config_error() {
        let dir = std::env::temp_dir().join("swarmsel_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad_family.json");
        std::fs::write(&path, minimal_json().replace("logistic", "quantum_forest")).unwrap();
        let err = RunConfig::load(&path, &Overrides::default()).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn overrides_apply() {
        let dir = std::env::temp_dir().join("swarmsel_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ovr.json");
        std::fs::write(&path, minimal_json()).unwrap();
        let overrides = Overrides {
            seed: Some(7),
            out: Some(PathBuf::from("/tmp/elsewhere")),
            eval_mode: Some(FitnessEvalMode::ValidationSplit),
        };
        let cfg = RunConfig::load(&path, &overrides).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.swarm.seed, 7);
        assert_eq!(cfg.output_dir, PathBuf::from("/tmp/elsewhere"));
        assert_eq!(
            cfg.swarm.fitness_eval_mode,
            FitnessEvalMode::ValidationSplit
        );
    }
}
