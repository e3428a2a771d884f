//! Declarative bench runs. A config file (TOML or JSON) fixes the dataset,
//! the index, the layouts and the sweep; command-line flags override it.

use std::path::{Path, PathBuf};

use annlayout::bench::{DimensionSweepConfig, DEFAULT_L_GRID, DEFAULT_TRIALS};
use annlayout::construct::{BuildParams, Builder};
use annlayout::dataset_io::{DatasetManifest, VectorFormat};
use annlayout::reorder::{ReorderAlgorithm, ReorderSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryFile {
    pub path: PathBuf,
    pub format: VectorFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSection {
    pub builder: Builder,
    #[serde(default)]
    pub params: BuildParams,
}

impl Default for BuildSection {
    fn default() -> Self {
        Self {
            builder: Builder::NnDescent,
            params: BuildParams::default(),
        }
    }
}

/// The dimensionality study: synthetic data per `d`, indexed by every
/// builder, swept with the bench-level layouts and `L` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionStudy {
    pub d_grid: Vec<usize>,
    pub n: usize,
    pub n_queries: usize,
    pub seed: u64,
    pub query_seed: u64,
    #[serde(default)]
    pub distribution: annlayout::dataset_io::Distribution,
    #[serde(default)]
    pub normalize: bool,
    pub metric: annlayout::Metric,
    pub builders: Vec<Builder>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub output_dir: PathBuf,
    #[serde(default)]
    pub index_label: Option<String>,
    #[serde(default)]
    pub dataset_label: Option<String>,
    #[serde(default)]
    pub dataset: Option<DatasetManifest>,
    #[serde(default)]
    pub queries: Option<QueryFile>,
    /// ivecs ground truth; computed exactly when absent.
    #[serde(default)]
    pub ground_truth: Option<PathBuf>,
    /// Prebuilt fixed-bin graph; built from `build` when absent.
    #[serde(default)]
    pub graph: Option<PathBuf>,
    #[serde(default)]
    pub build: BuildSection,
    /// Explicit entry vertices. A Vamana build supplies its medoid.
    #[serde(default)]
    pub entry_points: Option<Vec<u32>>,
    #[serde(default = "one")]
    pub random_entries: usize,
    #[serde(default = "default_reorders")]
    pub reorders: Vec<ReorderSpec>,
    #[serde(default = "default_l_grid")]
    pub l_grid: Vec<usize>,
    #[serde(default = "ten")]
    pub k: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Seed for random entry points.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default = "yes")]
    pub strict_equivalence: bool,
    #[serde(default)]
    pub dimension_study: Option<DimensionStudy>,
}

fn one() -> usize {
    1
}
fn ten() -> usize {
    10
}
fn yes() -> bool {
    true
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_l_grid() -> Vec<usize> {
    DEFAULT_L_GRID.to_vec()
}
fn default_reorders() -> Vec<ReorderSpec> {
    ReorderAlgorithm::STUDIED.into_iter().map(ReorderSpec::new).collect()
}

impl BenchConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path.extension().and_then(|e| e.to_str()) == Some("json");
        let parsed = if is_json {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.dimension_study.is_none() && (self.dataset.is_none() || self.queries.is_none()) {
            return Err(CliError::Config(
                "config needs `dataset` and `queries` (or a `dimension_study` section)".into(),
            ));
        }
        if self.l_grid.is_empty() || self.trials == 0 || self.k == 0 {
            return Err(CliError::Config("l_grid, trials and k must be non-empty / positive".into()));
        }
        Ok(())
    }

    pub fn dimension_sweep_config(&self, study: &DimensionStudy, sweep: annlayout::bench::SweepConfig) -> DimensionSweepConfig {
        DimensionSweepConfig {
            d_grid: study.d_grid.clone(),
            n: study.n,
            n_queries: study.n_queries,
            seed: study.seed,
            query_seed: study.query_seed,
            distribution: study.distribution,
            normalize: study.normalize,
            metric: study.metric,
            builders: study.builders.clone(),
            build: self.build.params.clone(),
            sweep,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_toml_fills_defaults() {
        let cfg: BenchConfig = toml::from_str(
            r#"
output_dir = "out"
[dataset]
path = "base.fvecs"
format = "fvecs"
metric = "l2"
[queries]
path = "q.fvecs"
format = "fvecs"
"#,
        )
        .unwrap();
        assert_eq!(cfg.l_grid.len(), 16);
        assert_eq!(cfg.reorders.len(), 6);
        assert_eq!(cfg.trials, 5);
        assert_eq!(cfg.build.builder, Builder::NnDescent);
        cfg.validate().unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<BenchConfig>(&json).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<BenchConfig>("output_dir = \"o\"\nbogus = 1\n").is_err());
    }
}
