//! Vertex reorderings. Each strategy is a pure function from graph structure
//! to a [`Permutation`]; ties everywhere break by ascending original id.

mod degree;
mod gorder;
mod rcm;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FixedDegreeGraph, Permutation, VertexId};
use crate::rng;

pub use degree::{degree_sort, hub_sort, mean_in_degree, DegreeDirection};
pub use gorder::{gorder, windowed_score};
pub use rcm::rcm;

pub const DEFAULT_GORDER_WINDOW: usize = 10;
pub const PERM_MAGIC: &[u8; 4] = b"PERM";
pub const PERM_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReorderAlgorithm {
    Identity,
    IndegreeSort,
    OutdegreeSort,
    HubSort,
    Gorder,
    Rcm,
    Random,
}

impl ReorderAlgorithm {
    /// The six strategies under study, in a fixed order.
    pub const STUDIED: [ReorderAlgorithm; 6] = [
        ReorderAlgorithm::IndegreeSort,
        ReorderAlgorithm::OutdegreeSort,
        ReorderAlgorithm::HubSort,
        ReorderAlgorithm::Gorder,
        ReorderAlgorithm::Rcm,
        ReorderAlgorithm::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReorderAlgorithm::Identity => "identity",
            ReorderAlgorithm::IndegreeSort => "indegree-sort",
            ReorderAlgorithm::OutdegreeSort => "outdegree-sort",
            ReorderAlgorithm::HubSort => "hub-sort",
            ReorderAlgorithm::Gorder => "gorder",
            ReorderAlgorithm::Rcm => "rcm",
            ReorderAlgorithm::Random => "random",
        }
    }
}

impl std::fmt::Display for ReorderAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ReorderAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [ReorderAlgorithm::Identity]
            .into_iter()
            .chain(ReorderAlgorithm::STUDIED)
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::contract(format!("unknown reordering `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HubThreshold {
    /// Mean in-degree of the graph being reordered.
    #[default]
    MeanInDegree,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReorderSpec {
    pub algorithm: ReorderAlgorithm,
    /// GOrder window size.
    pub window: usize,
    pub hub_threshold: HubThreshold,
    /// Seed for the random strategy.
    pub seed: u64,
}

impl Default for ReorderSpec {
    fn default() -> Self {
        Self {
            algorithm: ReorderAlgorithm::Identity,
            window: DEFAULT_GORDER_WINDOW,
            hub_threshold: HubThreshold::MeanInDegree,
            seed: 0,
        }
    }
}

impl ReorderSpec {
    pub fn new(algorithm: ReorderAlgorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    pub fn label(&self) -> String {
        self.algorithm.name().to_string()
    }

    pub fn compute(&self, g: &FixedDegreeGraph) -> Result<Permutation> {
        match self.algorithm {
            ReorderAlgorithm::Identity => Ok(Permutation::identity(g.len())),
            ReorderAlgorithm::IndegreeSort => Ok(degree_sort(g, DegreeDirection::In)),
            ReorderAlgorithm::OutdegreeSort => Ok(degree_sort(g, DegreeDirection::Out)),
            ReorderAlgorithm::HubSort => {
                let t = match self.hub_threshold {
                    HubThreshold::MeanInDegree => mean_in_degree(g),
                    HubThreshold::Value(t) => t,
                };
                hub_sort(g, t)
            }
            ReorderAlgorithm::Gorder => gorder(g, self.window),
            ReorderAlgorithm::Rcm => Ok(rcm(g)),
            ReorderAlgorithm::Random => random_order(g.len(), self.seed),
        }
    }
}

/// Uniformly random permutation via Fisher–Yates on a seeded ChaCha8 stream.
pub fn random_order(n: usize, seed: u64) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::contract("random order needs n >= 1"));
    }
    let mut forward: Vec<VertexId> = (0..n as VertexId).collect();
    rng::fisher_yates(&mut forward, &mut rng::seeded(seed));
    Permutation::from_forward(forward)
}

pub fn encode_perm(p: &Permutation) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * p.len());
    out.extend_from_slice(PERM_MAGIC);
    out.extend_from_slice(&PERM_VERSION.to_le_bytes());
    out.extend_from_slice(&(p.len() as u32).to_le_bytes());
    for &x in p.forward() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn parse_perm(bytes: &[u8]) -> Result<Permutation> {
    if bytes.len() < 12 {
        return Err(Error::at_byte(0, "truncated PERM header"));
    }
    if &bytes[0..4] != PERM_MAGIC {
        return Err(Error::at_byte(0, "bad magic, expected \"PERM\""));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != PERM_VERSION {
        return Err(Error::at_byte(4, format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if bytes.len() != 12 + 4 * n {
        return Err(Error::at_byte(
            8,
            format!("header declares n = {n} but payload holds {} bytes", bytes.len() - 12),
        ));
    }
    let forward: Vec<VertexId> = bytes[12..]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut seen = vec![false; n];
    for (i, &x) in forward.iter().enumerate() {
        if x as usize >= n || std::mem::replace(&mut seen[x as usize], true) {
            return Err(Error::at_byte(
                (12 + 4 * i) as u64,
                format!("entry {i} = {x} breaks the bijection"),
            ));
        }
    }
    Permutation::from_forward(forward)
}

pub fn write_perm(path: impl AsRef<Path>, p: &Permutation) -> Result<()> {
    fs::write(path, encode_perm(p))?;
    Ok(())
}

pub fn read_perm(path: impl AsRef<Path>) -> Result<Permutation> {
    parse_perm(&fs::read(path)?)
}

#[cfg(test)]
pub(crate) mod test_graphs {
    use crate::graph::FixedDegreeGraph;
    use rand::Rng;

    pub fn random_graph(n: usize, k: usize, seed: u64) -> FixedDegreeGraph {
        let mut r = crate::rng::seeded(seed);
        let rows: Vec<Vec<u32>> = (0..n)
            .map(|v| {
                let d = r.random_range(0..=k.min(n - 1));
                crate::rng::sample_distinct_excluding(n, d, Some(v), &mut r)
            })
            .collect();
        FixedDegreeGraph::from_rows(k, &rows).unwrap()
    }

    /// Symmetric graph from undirected edge pairs.
    pub fn undirected(n: usize, edges: &[(u32, u32)]) -> FixedDegreeGraph {
        let mut rows = vec![Vec::new(); n];
        for &(a, b) in edges {
            rows[a as usize].push(b);
            rows[b as usize].push(a);
        }
        let k = rows.iter().map(Vec::len).max().unwrap_or(0).max(1);
        FixedDegreeGraph::from_rows(k, &rows).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn random_order_basics() {
        assert_eq!(random_order(50, 3).unwrap(), random_order(50, 3).unwrap());
        assert!(random_order(1, 9).unwrap().is_identity());
        assert!(random_order(0, 1).is_err());
    }

    #[test]
    fn random_order_is_uniform_on_three() {
        // 6 outcomes, 60000 draws: each count within 3 sigma of 10000
        let mut counts = std::collections::HashMap::new();
        for seed in 0..60_000u64 {
            *counts.entry(random_order(3, seed).unwrap().forward().to_vec()).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        let sigma = (60_000.0f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for (perm, c) in counts {
            assert!((c as f64 - 10_000.0).abs() < 3.0 * sigma, "{perm:?}: {c}");
        }
    }

    #[test]
    fn perm_header_errors() {
        let p = random_order(5, 1).unwrap();
        let good = encode_perm(&p);
        assert_eq!(parse_perm(&good).unwrap(), p);
        let mut bad = good.clone();
        bad[3] = b'X';
        assert!(matches!(parse_perm(&bad), Err(Error::Format { offset: 0, .. })));
        assert!(matches!(parse_perm(&good[..15]), Err(Error::Format { offset: 8, .. })));
        let mut dup = good.clone();
        dup[16..20].copy_from_slice(&p.forward()[0].to_le_bytes());
        assert!(matches!(parse_perm(&dup), Err(Error::Format { offset: 16, .. })));
    }

    #[test]
    fn names_round_trip() {
        for a in ReorderAlgorithm::STUDIED {
            assert_eq!(a.name().parse::<ReorderAlgorithm>().unwrap(), a);
        }
        assert!("metis".parse::<ReorderAlgorithm>().is_err());
    }

    proptest! {
        #[test]
        fn every_strategy_is_a_bijection(n in 1usize..60, k in 1usize..6, seed: u64) {
            let g = test_graphs::random_graph(n, k, seed);
            for algo in ReorderAlgorithm::STUDIED {
                let mut spec = ReorderSpec::new(algo);
                spec.seed = seed;
                spec.window = 1 + (seed % 12) as usize;
                let p = spec.compute(&g).unwrap();
                let mut sorted = p.forward().to_vec();
                sorted.sort_unstable();
                prop_assert_eq!(sorted, (0..n as u32).collect::<Vec<_>>());
            }
            let p = random_order(n, seed).unwrap();
            prop_assert_eq!(parse_perm(&encode_perm(&p)).unwrap(), p);
        }
    }
}
