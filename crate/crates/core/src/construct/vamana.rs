//! Vamana: two refinement passes over a random initial graph. Each vertex is
//! searched for from the medoid, its candidate set is pruned with slack
//! `alpha`, and reverse edges are added (re-pruning any row that overflows).
//! The first pass uses `alpha = 1`, the second the configured value.
//!
//! Construction is sequential: each step reads the graph the previous step
//! wrote, which keeps the output a pure function of the seed.

use rayon::prelude::*;

use super::BuildParams;
use crate::error::Result;
use crate::graph::{cmp_dist_id, FixedDegreeGraph, VectorDataset, VertexId};
use crate::rng;
use crate::search::{search_core, SearchScratch};

const MEDOID_SAMPLE: usize = 1000;

#[derive(Debug, Clone)]
pub struct VamanaIndex {
    pub graph: FixedDegreeGraph,
    pub medoid: VertexId,
}

/// Vertex minimizing the summed distance to a seeded sample of at most 1000
/// vectors (all vectors when `n <= 1000`). Ties go to the lower id.
pub fn medoid(ds: &VectorDataset, seed: u64) -> VertexId {
    let n = ds.len();
    let sample: Vec<VertexId> = if n <= MEDOID_SAMPLE {
        (0..n as VertexId).collect()
    } else {
        let mut r = rng::seeded(seed);
        rng::sample_distinct_excluding(n, MEDOID_SAMPLE, None, &mut r)
    };
    let sums: Vec<f64> = (0..n as VertexId)
        .into_par_iter()
        .map(|v| sample.iter().map(|&s| ds.pair_distance(v, s) as f64).sum())
        .collect();
    let mut best = 0usize;
    for (v, &s) in sums.iter().enumerate() {
        if s < sums[best] {
            best = v;
        }
    }
    best as VertexId
}

/// Greedy occlusion: repeatedly keep the closest remaining candidate `c` and
/// drop every `x` with `alpha * d(c, x) <= d(p, x)`.
fn robust_prune(
    ds: &VectorDataset,
    p: VertexId,
    candidates: impl IntoIterator<Item = VertexId>,
    alpha: f32,
    degree: usize,
) -> Vec<VertexId> {
    let mut pool: Vec<(f32, VertexId)> = candidates
        .into_iter()
        .filter(|&c| c != p)
        .map(|c| (ds.pair_distance(p, c), c))
        .collect();
    pool.sort_unstable_by(|a, b| cmp_dist_id(*a, *b));
    pool.dedup_by_key(|e| e.1);
    let mut kept = Vec::with_capacity(degree);
    let mut alive = vec![true; pool.len()];
    for i in 0..pool.len() {
        if kept.len() == degree {
            break;
        }
        if !alive[i] {
            continue;
        }
        let (_, c) = pool[i];
        kept.push(c);
        for j in i + 1..pool.len() {
            if alive[j] && alpha * ds.pair_distance(c, pool[j].1) <= pool[j].0 {
                alive[j] = false;
            }
        }
    }
    kept
}

pub fn build_vamana(ds: &VectorDataset, params: &BuildParams) -> Result<VamanaIndex> {
    let n = ds.len();
    params.validate(n)?;
    let degree = params.k_max;
    let beam = params.build_beam_width.max(degree);
    let mut r = rng::seeded(params.seed);
    let entry = medoid(ds, params.seed);

    let mut adj: Vec<Vec<VertexId>> = (0..n)
        .map(|v| rng::sample_distinct_excluding(n, degree, Some(v), &mut r))
        .collect();
    let mut order: Vec<VertexId> = (0..n as VertexId).collect();
    rng::fisher_yates(&mut order, &mut r);

    let mut scratch = SearchScratch::new(n);
    let mut expanded = Vec::new();
    for alpha in [1.0f32, params.alpha] {
        for &v in &order {
            expanded.clear();
            search_core(
                &adj,
                ds,
                ds.row(v as usize),
                &[entry],
                beam,
                usize::MAX,
                &mut scratch,
                Some(&mut expanded),
            );
            let cands = expanded.iter().map(|e| e.1).chain(adj[v as usize].iter().copied());
            let pruned = robust_prune(ds, v, cands.collect::<Vec<_>>(), alpha, degree);
            adj[v as usize] = pruned;
            for i in 0..adj[v as usize].len() {
                let u = adj[v as usize][i] as usize;
                if adj[u].contains(&v) {
                    continue;
                }
                if adj[u].len() < degree {
                    adj[u].push(v);
                } else {
                    let cands: Vec<VertexId> = adj[u].iter().copied().chain([v]).collect();
                    adj[u] = robust_prune(ds, u as VertexId, cands, alpha, degree);
                }
            }
        }
    }

    Ok(VamanaIndex {
        graph: FixedDegreeGraph::from_rows(degree, &adj)?,
        medoid: entry,
    })
}
