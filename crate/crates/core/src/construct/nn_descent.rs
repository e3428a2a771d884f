//! NN-Descent: start from a random kNN graph and repeatedly compare each
//! vertex's neighbors with one another (the local join), keeping any closer
//! candidates found.
//!
//! Local joins run in parallel over fixed-size vertex chunks against a
//! snapshot of the lists; the resulting updates are applied sequentially in
//! vertex order, so the output is independent of the worker count.

use rayon::prelude::*;

use super::BuildParams;
use crate::error::Result;
use crate::graph::{cmp_dist_id, FixedDegreeGraph, VectorDataset, VertexId};
use crate::rng::{self, SeededRng};

const JOIN_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy)]
struct Entry {
    dist: f32,
    id: VertexId,
    is_new: bool,
}

/// Bounded neighbor list kept sorted by `(distance, id)`.
struct NeighborList {
    entries: Vec<Entry>,
}

impl NeighborList {
    #[inline]
    fn worst(&self, cap: usize) -> (f32, VertexId) {
        if self.entries.len() < cap {
            (f32::INFINITY, VertexId::MAX)
        } else {
            let e = self.entries[self.entries.len() - 1];
            (e.dist, e.id)
        }
    }

    /// Inserts `id` if it is closer than the current worst entry. Returns
    /// whether the list changed.
    fn insert(&mut self, cap: usize, dist: f32, id: VertexId) -> bool {
        if cmp_dist_id((dist, id), self.worst(cap)).is_ge() {
            return false;
        }
        if self.entries.iter().any(|e| e.id == id) {
            return false;
        }
        let pos = self
            .entries
            .partition_point(|e| cmp_dist_id((e.dist, e.id), (dist, id)).is_lt());
        if self.entries.len() == cap {
            self.entries.pop();
        }
        self.entries.insert(
            pos,
            Entry {
                dist,
                id,
                is_new: true,
            },
        );
        true
    }

    fn distance_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.dist as f64).sum()
    }
}

/// Per-iteration diagnostics from [`build_nn_descent_traced`].
#[derive(Debug, Clone, Default)]
pub struct NnDescentTrace {
    /// Accepted list updates in each completed iteration.
    pub updates: Vec<usize>,
    /// Per-vertex sums of neighbor distances, before the first iteration and
    /// after each one.
    pub row_distance_sums: Vec<Vec<f64>>,
}

fn subsample(items: &mut Vec<VertexId>, cap: usize, rng: &mut SeededRng) {
    if items.len() > cap {
        rng::fisher_yates(items, rng);
        items.truncate(cap);
    }
}

pub fn build_nn_descent(ds: &VectorDataset, params: &BuildParams) -> Result<FixedDegreeGraph> {
    build(ds, params, None)
}

/// [`build_nn_descent`] that also records convergence diagnostics.
pub fn build_nn_descent_traced(
    ds: &VectorDataset,
    params: &BuildParams,
) -> Result<(FixedDegreeGraph, NnDescentTrace)> {
    let mut trace = NnDescentTrace::default();
    let g = build(ds, params, Some(&mut trace))?;
    Ok((g, trace))
}

fn build(
    ds: &VectorDataset,
    params: &BuildParams,
    mut trace: Option<&mut NnDescentTrace>,
) -> Result<FixedDegreeGraph> {
    let n = ds.len();
    params.validate(n)?;
    let k = params.k_max;
    let sample_cap = ((params.sample_rate * k as f64).ceil() as usize).max(1);
    let mut rng = rng::seeded(params.seed);

    let mut lists: Vec<NeighborList> = (0..n)
        .map(|v| {
            let mut entries: Vec<Entry> = rng::sample_distinct_excluding(n, k, Some(v), &mut rng)
                .into_iter()
                .map(|u| Entry {
                    dist: ds.pair_distance(v as VertexId, u),
                    id: u,
                    is_new: true,
                })
                .collect();
            entries.sort_unstable_by(|a, b| cmp_dist_id((a.dist, a.id), (b.dist, b.id)));
            NeighborList { entries }
        })
        .collect();

    if let Some(t) = trace.as_deref_mut() {
        t.row_distance_sums.push(lists.iter().map(NeighborList::distance_sum).collect());
    }

    let threshold = params.convergence_delta * n as f64 * k as f64;
    for _ in 0..params.max_iters {
        let mut new_lists: Vec<Vec<VertexId>> = Vec::with_capacity(n);
        let mut old_lists: Vec<Vec<VertexId>> = Vec::with_capacity(n);
        for list in lists.iter_mut() {
            let old: Vec<VertexId> = list.entries.iter().filter(|e| !e.is_new).map(|e| e.id).collect();
            let mut fresh: Vec<VertexId> = list.entries.iter().filter(|e| e.is_new).map(|e| e.id).collect();
            subsample(&mut fresh, sample_cap, &mut rng);
            for e in list.entries.iter_mut() {
                if fresh.contains(&e.id) {
                    e.is_new = false;
                }
            }
            new_lists.push(fresh);
            old_lists.push(old);
        }

        let mut rev_new: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        let mut rev_old: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for v in 0..n {
            for &u in &new_lists[v] {
                rev_new[u as usize].push(v as VertexId);
            }
            for &u in &old_lists[v] {
                rev_old[u as usize].push(v as VertexId);
            }
        }
        for v in 0..n {
            let mut rn = std::mem::take(&mut rev_new[v]);
            subsample(&mut rn, sample_cap, &mut rng);
            new_lists[v].extend(rn);
            new_lists[v].sort_unstable();
            new_lists[v].dedup();

            let mut ro = std::mem::take(&mut rev_old[v]);
            subsample(&mut ro, sample_cap, &mut rng);
            old_lists[v].extend(ro);
            old_lists[v].sort_unstable();
            old_lists[v].dedup();
        }

        let mut updates = 0usize;
        for start in (0..n).step_by(JOIN_CHUNK) {
            let end = (start + JOIN_CHUNK).min(n);
            let snapshot = &lists;
            let proposals: Vec<Vec<(VertexId, VertexId, f32)>> = (start..end)
                .into_par_iter()
                .map(|v| {
                    let mut out = Vec::new();
                    let fresh = &new_lists[v];
                    let old = &old_lists[v];
                    let mut consider = |a: VertexId, b: VertexId| {
                        if a == b {
                            return;
                        }
                        let d = ds.pair_distance(a, b);
                        if cmp_dist_id((d, b), snapshot[a as usize].worst(k)).is_lt()
                            || cmp_dist_id((d, a), snapshot[b as usize].worst(k)).is_lt()
                        {
                            out.push((a, b, d));
                        }
                    };
                    for (i, &a) in fresh.iter().enumerate() {
                        for &b in &fresh[i + 1..] {
                            consider(a, b);
                        }
                        for &b in old {
                            consider(a, b);
                        }
                    }
                    out
                })
                .collect();
            for (a, b, d) in proposals.into_iter().flatten() {
                updates += usize::from(lists[a as usize].insert(k, d, b));
                updates += usize::from(lists[b as usize].insert(k, d, a));
            }
        }

        if let Some(t) = trace.as_deref_mut() {
            t.updates.push(updates);
            t.row_distance_sums.push(lists.iter().map(NeighborList::distance_sum).collect());
        }
        if (updates as f64) < threshold {
            break;
        }
    }

    let rows: Vec<Vec<VertexId>> = lists
        .into_iter()
        .map(|l| l.entries.into_iter().map(|e| e.id).collect())
        .collect();
    FixedDegreeGraph::from_rows(k, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_exact_knn;
    use crate::dataset_io::{generate_synthetic, SyntheticSpec};
    use crate::graph::{Metric, Vectors};

    fn row_recall(a: &FixedDegreeGraph, exact: &FixedDegreeGraph) -> f64 {
        let mut hit = 0;
        for v in 0..a.len() as VertexId {
            hit += a.neighbors(v).iter().filter(|u| exact.neighbors(v).contains(u)).count();
        }
        hit as f64 / exact.edge_count() as f64
    }

    fn clustered(n: usize, seed: u64) -> VectorDataset {
        use rand::Rng;
        let mut r = rng::seeded(seed);
        let centers = [(0.0f32, 0.0f32), (100.0, 0.0), (0.0, 100.0), (100.0, 100.0), (50.0, 200.0)];
        let data: Vec<f32> = (0..n)
            .flat_map(|i| {
                let c = centers[i % centers.len()];
                [c.0 + r.random::<f32>(), c.1 + r.random::<f32>()]
            })
            .collect();
        VectorDataset::new(Vectors::new(2, data).unwrap(), Metric::L2)
    }

    #[test]
    fn well_separated_clusters_converge() {
        let ds = clustered(50, 3);
        let params = BuildParams::default().with_k_max(5).with_seed(1);
        let g = build_nn_descent(&ds, &params).unwrap();
        let exact = build_exact_knn(&ds, 5).unwrap();
        assert!(row_recall(&g, &exact) >= 0.90, "recall {}", row_recall(&g, &exact));
    }

    #[test]
    fn zero_iterations_returns_random_init() {
        let (ds, _) = generate_synthetic(&SyntheticSpec::new(100, 4, 1, 2, 1), Metric::L2).unwrap();
        let mut params = BuildParams::default().with_k_max(8).with_seed(9);
        params.max_iters = 0;
        let a = build_nn_descent(&ds, &params).unwrap();
        // the init draws k distinct non-self ids per row from the seeded stream
        let mut r = rng::seeded(9);
        for v in 0..100usize {
            let mut expected = rng::sample_distinct_excluding(100, 8, Some(v), &mut r);
            expected.sort_unstable_by(|&x, &y| {
                cmp_dist_id(
                    (ds.pair_distance(v as u32, x), x),
                    (ds.pair_distance(v as u32, y), y),
                )
            });
            assert_eq!(a.neighbors(v as u32), expected.as_slice());
        }
    }

    #[test]
    fn deterministic_and_monotone() {
        let (ds, _) = generate_synthetic(&SyntheticSpec::new(600, 8, 4, 5, 1), Metric::L2).unwrap();
        let mut params = BuildParams::default().with_k_max(10).with_seed(17);
        params.sample_rate = 0.5;
        let (a, trace) = build_nn_descent_traced(&ds, &params).unwrap();
        let b = build_nn_descent(&ds, &params).unwrap();
        assert_eq!(a, b);
        for w in trace.row_distance_sums.windows(2) {
            for (before, after) in w[0].iter().zip(&w[1]) {
                assert!(after <= before);
            }
        }
        assert!(trace.updates.len() >= 2);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        assert_eq!(single.install(|| build_nn_descent(&ds, &params).unwrap()), a);
    }

    #[test]
    fn converges_toward_exact_knn() {
        let (ds, _) = generate_synthetic(&SyntheticSpec::new(2000, 8, 6, 7, 1), Metric::L2).unwrap();
        let params = BuildParams::default().with_k_max(16).with_seed(2);
        let g = build_nn_descent(&ds, &params).unwrap();
        g.validate().unwrap();
        let exact = build_exact_knn(&ds, 16).unwrap();
        assert!(row_recall(&g, &exact) > 0.9);
    }
}
