use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{cmp_dist_id, FixedDegreeGraph, VectorDataset, VertexId};

/// Each row holds the exact `k` nearest other vertices, ascending by
/// `(distance, id)`.
pub fn build_exact_knn(ds: &VectorDataset, k: usize) -> Result<FixedDegreeGraph> {
    let n = ds.len();
    if k == 0 || k >= n {
        return Err(Error::contract(format!(
            "exact kNN needs 1 <= k <= n - 1 (k = {k}, n = {n})"
        )));
    }
    let rows: Vec<Vec<VertexId>> = (0..n as VertexId)
        .into_par_iter()
        .map(|v| {
            let mut cands: Vec<(f32, VertexId)> = (0..n as VertexId)
                .filter(|&u| u != v)
                .map(|u| (ds.pair_distance(v, u), u))
                .collect();
            let cmp = |a: &(f32, VertexId), b: &(f32, VertexId)| cmp_dist_id(*a, *b);
            if k < cands.len() {
                cands.select_nth_unstable_by(k, cmp);
                cands.truncate(k);
            }
            cands.sort_unstable_by(cmp);
            cands.into_iter().map(|(_, u)| u).collect()
        })
        .collect();
    FixedDegreeGraph::from_rows(k, &rows)
}
