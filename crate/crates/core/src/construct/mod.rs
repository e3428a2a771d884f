//! Native graph builders: exact kNN (the reference graph), NN-Descent and
//! Vamana.

mod exact;
mod nn_descent;
mod vamana;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FixedDegreeGraph, VectorDataset};

pub use exact::build_exact_knn;
pub use nn_descent::{build_nn_descent, build_nn_descent_traced, NnDescentTrace};
pub use vamana::{build_vamana, medoid, VamanaIndex};

pub const DEFAULT_K_MAX: usize = 32;

/// Build knobs for every builder. Unused fields are ignored by builders that
/// do not need them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildParams {
    /// Slots per row.
    pub k_max: usize,
    /// NN-Descent sampling rate in `(0, 1]`.
    pub sample_rate: f64,
    pub max_iters: usize,
    /// NN-Descent stops once fewer than `convergence_delta * n * k_max`
    /// entries change in an iteration.
    pub convergence_delta: f64,
    /// Vamana pruning slack, `>= 1`.
    pub alpha: f32,
    pub build_beam_width: usize,
    pub seed: u64,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_K_MAX,
            sample_rate: 1.0,
            max_iters: 10,
            convergence_delta: 0.001,
            alpha: 1.2,
            build_beam_width: 64,
            seed: 0,
        }
    }
}

impl BuildParams {
    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k_max < 2 || self.k_max >= n {
            return Err(Error::contract(format!(
                "k_max = {} must satisfy 2 <= k_max <= n - 1 = {}",
                self.k_max,
                n.saturating_sub(1)
            )));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate <= 1.0) {
            return Err(Error::contract(format!(
                "sample_rate = {} must lie in (0, 1]",
                self.sample_rate
            )));
        }
        if self.alpha.is_nan() || self.alpha < 1.0 {
            return Err(Error::contract(format!("alpha = {} must be >= 1", self.alpha)));
        }
        if self.build_beam_width == 0 {
            return Err(Error::contract("build_beam_width must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builder {
    Exact,
    NnDescent,
    Vamana,
}

impl std::fmt::Display for Builder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Builder::Exact => "exact",
            Builder::NnDescent => "nn-descent",
            Builder::Vamana => "vamana",
        })
    }
}

impl std::str::FromStr for Builder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact-knn" => Ok(Builder::Exact),
            "nn-descent" | "nndescent" => Ok(Builder::NnDescent),
            "vamana" => Ok(Builder::Vamana),
            other => Err(Error::contract(format!("unknown builder `{other}`"))),
        }
    }
}

/// A built index plus the entry points its builder recommends, if any.
#[derive(Debug, Clone)]
pub struct BuiltIndex {
    pub graph: FixedDegreeGraph,
    pub entry_points: Option<Vec<u32>>,
}

pub fn build(builder: Builder, ds: &VectorDataset, params: &BuildParams) -> Result<BuiltIndex> {
    match builder {
        Builder::Exact => Ok(BuiltIndex {
            graph: build_exact_knn(ds, params.k_max)?,
            entry_points: None,
        }),
        Builder::NnDescent => Ok(BuiltIndex {
            graph: build_nn_descent(ds, params)?,
            entry_points: None,
        }),
        Builder::Vamana => {
            let v = build_vamana(ds, params)?;
            Ok(BuiltIndex {
                graph: v.graph,
                entry_points: Some(vec![v.medoid]),
            })
        }
    }
}
