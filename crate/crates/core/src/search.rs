//! Best-first beam search over a fixed-degree graph.
//!
//! The candidate pool holds at most `L` entries ordered by `(distance, id)`.
//! Each iteration expands the closest unexpanded entry, scores its unvisited
//! neighbors and truncates the pool back to `L`. Search stops once every pool
//! entry is expanded or the iteration guard trips. Every choice goes through
//! the `(distance, id)` order, so results do not depend on neighbor storage
//! order or on how queries are scheduled across workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{cmp_dist_id, FixedDegreeGraph, Permutation, VectorDataset, Vectors, VertexId};
use crate::rng;

/// How the search seeds its candidate pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryPoints {
    /// Explicit vertex set (e.g. a Vamana medoid).
    Fixed(Vec<VertexId>),
    /// `count` distinct vertices drawn from the params seed. The draw depends
    /// only on `(seed, n)`, so every query in a batch starts from the same set.
    Random { count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Candidate pool capacity.
    pub l: usize,
    /// Number of results returned.
    pub k: usize,
    pub entry: EntryPoints,
    pub seed: u64,
    /// Expansion guard; `None` means `10 * L`.
    #[serde(default)]
    pub max_iterations: Option<usize>,
}

impl SearchParams {
    pub fn new(l: usize, k: usize) -> Self {
        Self {
            l,
            k,
            entry: EntryPoints::Random { count: 1 },
            seed: 0,
            max_iterations: None,
        }
    }

    pub fn with_entry(mut self, entry: EntryPoints) -> Self {
        self.entry = entry;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_l(mut self, l: usize) -> Self {
        self.l = l;
        self
    }

    pub fn iteration_limit(&self) -> usize {
        self.max_iterations.unwrap_or(10 * self.l)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::contract("cannot search an empty graph"));
        }
        if self.l == 0 {
            return Err(Error::contract("L must be at least 1"));
        }
        if self.k == 0 || self.k > self.l {
            return Err(Error::contract(format!(
                "k = {} must satisfy 1 <= k <= L = {}",
                self.k, self.l
            )));
        }
        if self.k > n {
            return Err(Error::contract(format!("k = {} exceeds n = {n}", self.k)));
        }
        Ok(())
    }

    /// Concrete entry vertices for a graph of `n` vertices, deduplicated in
    /// first-seen order.
    pub fn resolve_entries(&self, n: usize) -> Result<Vec<VertexId>> {
        let mut out: Vec<VertexId> = Vec::new();
        match &self.entry {
            EntryPoints::Fixed(ids) => {
                for &id in ids {
                    if id as usize >= n {
                        return Err(Error::contract(format!("entry point {id} out of range (n = {n})")));
                    }
                    if !out.contains(&id) {
                        out.push(id);
                    }
                }
            }
            EntryPoints::Random { count } => {
                let mut r = rng::seeded(self.seed);
                out = rng::sample_distinct_excluding(n, (*count).min(n), None, &mut r);
            }
        }
        if out.is_empty() {
            return Err(Error::contract("at least one entry point is required"));
        }
        Ok(out)
    }

    /// The same search on a relabeled index: entries resolved here, then
    /// mapped through `perm`.
    pub fn mapped_through(&self, perm: &Permutation) -> Result<Self> {
        let entries = self.resolve_entries(perm.len())?;
        Ok(Self {
            entry: EntryPoints::Fixed(entries.into_iter().map(|e| perm.apply(e)).collect()),
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub distance_evals: u64,
    /// Expansion iterations.
    pub hops: u64,
    pub visited: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub ids: Vec<VertexId>,
    pub distances: Vec<f32>,
    pub stats: SearchStats,
}

/// Read access to out-neighbors, so construction can search graphs that are
/// still being built.
pub(crate) trait Adjacency {
    fn num_vertices(&self) -> usize;
    fn out_neighbors(&self, v: VertexId) -> &[VertexId];
}

impl Adjacency for FixedDegreeGraph {
    fn num_vertices(&self) -> usize {
        self.len()
    }

    #[inline]
    fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        self.neighbors(v)
    }
}

impl Adjacency for Vec<Vec<VertexId>> {
    fn num_vertices(&self) -> usize {
        self.len()
    }

    #[inline]
    fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self[v as usize]
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist: f32,
    id: VertexId,
    expanded: bool,
}

/// Per-worker buffers, reused across queries.
pub struct SearchScratch {
    stamps: Vec<u32>,
    epoch: u32,
    pool: Vec<Candidate>,
}

impl SearchScratch {
    pub fn new(n: usize) -> Self {
        Self {
            stamps: vec![0; n],
            epoch: 0,
            pool: Vec::new(),
        }
    }

    fn reset(&mut self, n: usize) {
        if self.stamps.len() != n {
            self.stamps = vec![0; n];
            self.epoch = 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamps.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.pool.clear();
    }

    /// Marks `v` visited; returns false if it already was.
    #[inline]
    fn visit(&mut self, v: VertexId) -> bool {
        let s = &mut self.stamps[v as usize];
        if *s == self.epoch {
            false
        } else {
            *s = self.epoch;
            true
        }
    }
}

/// Inserts into the sorted pool; returns the insertion index or `None` if the
/// candidate falls outside the best `capacity`.
#[inline]
fn pool_insert(pool: &mut Vec<Candidate>, capacity: usize, dist: f32, id: VertexId) -> Option<usize> {
    let pos = pool
        .binary_search_by(|c| cmp_dist_id((c.dist, c.id), (dist, id)))
        .unwrap_or_else(|p| p);
    if pos >= capacity {
        return None;
    }
    if pool.len() == capacity {
        pool.pop();
    }
    pool.insert(
        pos,
        Candidate {
            dist,
            id,
            expanded: false,
        },
    );
    Some(pos)
}

/// The search loop shared by queries and graph construction. Leaves the final
/// pool in `scratch.pool`. When `expanded` is given, every expanded vertex is
/// appended to it with its distance.
#[allow(clippy::too_many_arguments)]
pub(crate) fn search_core<A: Adjacency + ?Sized>(
    graph: &A,
    dataset: &VectorDataset,
    query: &[f32],
    entries: &[VertexId],
    capacity: usize,
    max_iterations: usize,
    scratch: &mut SearchScratch,
    mut expanded: Option<&mut Vec<(f32, VertexId)>>,
) -> SearchStats {
    let n = graph.num_vertices();
    scratch.reset(n);
    let mut stats = SearchStats::default();
    for &e in entries {
        if scratch.visit(e) {
            stats.visited += 1;
            stats.distance_evals += 1;
            let d = dataset.distance_to(query, e);
            pool_insert(&mut scratch.pool, capacity, d, e);
        }
    }

    let mut cursor = 0usize;
    while (stats.hops as usize) < max_iterations {
        while cursor < scratch.pool.len() && scratch.pool[cursor].expanded {
            cursor += 1;
        }
        if cursor >= scratch.pool.len() {
            break;
        }
        let current = &mut scratch.pool[cursor];
        current.expanded = true;
        let (v, vd) = (current.id, current.dist);
        if let Some(out) = expanded.as_deref_mut() {
            out.push((vd, v));
        }
        stats.hops += 1;
        for &u in graph.out_neighbors(v) {
            if !scratch.visit(u) {
                continue;
            }
            stats.visited += 1;
            stats.distance_evals += 1;
            let d = dataset.distance_to(query, u);
            if let Some(pos) = pool_insert(&mut scratch.pool, capacity, d, u) {
                cursor = cursor.min(pos);
            }
        }
    }
    stats
}

fn check_alignment(graph: &FixedDegreeGraph, dataset: &VectorDataset, dim: usize) -> Result<()> {
    if graph.len() != dataset.len() {
        return Err(Error::contract(format!(
            "graph has {} vertices but dataset has {} vectors",
            graph.len(),
            dataset.len()
        )));
    }
    if dim != dataset.dim() {
        return Err(Error::contract(format!(
            "query dimension {dim} does not match dataset dimension {}",
            dataset.dim()
        )));
    }
    Ok(())
}

fn search_resolved(
    graph: &FixedDegreeGraph,
    dataset: &VectorDataset,
    query: &[f32],
    params: &SearchParams,
    entries: &[VertexId],
    scratch: &mut SearchScratch,
) -> SearchResult {
    let stats = search_core(
        graph,
        dataset,
        query,
        entries,
        params.l,
        params.iteration_limit(),
        scratch,
        None,
    );
    let top = &scratch.pool[..params.k.min(scratch.pool.len())];
    SearchResult {
        ids: top.iter().map(|c| c.id).collect(),
        distances: top.iter().map(|c| c.dist).collect(),
        stats,
    }
}

/// Searches one query. Fewer than `k` ids come back only when fewer than `k`
/// vertices are reachable from the entry points.
pub fn beam_search(
    graph: &FixedDegreeGraph,
    dataset: &VectorDataset,
    query: &[f32],
    params: &SearchParams,
) -> Result<SearchResult> {
    params.validate(graph.len())?;
    check_alignment(graph, dataset, query.len())?;
    let entries = params.resolve_entries(graph.len())?;
    let mut scratch = SearchScratch::new(graph.len());
    Ok(search_resolved(graph, dataset, query, params, &entries, &mut scratch))
}

/// A worker pool for batch search. `None` workers uses rayon's global pool.
pub struct Executor {
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub fn new(workers: Option<usize>) -> Result<Self> {
        let pool = match workers {
            None | Some(0) => None,
            Some(w) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::contract(format!("cannot build worker pool: {e}")))?,
            ),
        };
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        match &self.pool {
            Some(p) => p.current_num_threads(),
            None => rayon::current_num_threads(),
        }
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(p) => p.install(f),
            None => f(),
        }
    }

    /// Searches every query; results are in query order and identical to
    /// per-query [`beam_search`] calls.
    pub fn batch_search(
        &self,
        graph: &FixedDegreeGraph,
        dataset: &VectorDataset,
        queries: &Vectors,
        params: &SearchParams,
    ) -> Result<Vec<SearchResult>> {
        params.validate(graph.len())?;
        check_alignment(graph, dataset, queries.dim())?;
        let entries = params.resolve_entries(graph.len())?;
        let n = graph.len();
        Ok(self.install(|| {
            (0..queries.len())
                .into_par_iter()
                .with_min_len(8)
                .map_init(
                    || SearchScratch::new(n),
                    |scratch, q| search_resolved(graph, dataset, queries.row(q), params, &entries, scratch),
                )
                .collect()
        }))
    }
}

/// [`Executor::batch_search`] on rayon's global pool.
pub fn batch_search(
    graph: &FixedDegreeGraph,
    dataset: &VectorDataset,
    queries: &Vectors,
    params: &SearchParams,
) -> Result<Vec<SearchResult>> {
    Executor::new(None)?.batch_search(graph, dataset, queries, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_exact_knn;
    use crate::dataset_io::{exact_ground_truth, generate_synthetic, SyntheticSpec};
    use crate::graph::{apply_permutation, Metric};
    use crate::reorder::random_order;

    fn collinear() -> VectorDataset {
        VectorDataset::new(Vectors::new(1, vec![0.0, 1.0, 3.0]).unwrap(), Metric::L2)
    }

    #[test]
    fn hand_traced_collinear_search() {
        let ds = collinear();
        let g = build_exact_knn(&ds, 2).unwrap();
        let params = SearchParams::new(3, 2).with_entry(EntryPoints::Fixed(vec![2]));
        let r = beam_search(&g, &ds, &[0.1], &params).unwrap();
        assert_eq!(r.ids, vec![0, 1]);
        assert_eq!(r.distances[0], Metric::L2.eval(&[0.1], &[0.0]));
        assert_eq!(r.stats.visited, 3);
        assert_eq!(r.stats.hops, 3);
    }

    #[test]
    fn contract_violations() {
        let ds = collinear();
        let g = build_exact_knn(&ds, 2).unwrap();
        assert!(beam_search(&g, &ds, &[0.0], &SearchParams::new(2, 3)).is_err());
        assert!(beam_search(&g, &ds, &[0.0], &SearchParams::new(4, 4)).is_err());
        assert!(beam_search(&g, &ds, &[0.0], &SearchParams::new(0, 0)).is_err());
        assert!(beam_search(&g, &ds, &[0.0, 1.0], &SearchParams::new(2, 1)).is_err());
        let bad = SearchParams::new(2, 1).with_entry(EntryPoints::Fixed(vec![9]));
        assert!(beam_search(&g, &ds, &[0.0], &bad).is_err());
        let none = SearchParams::new(2, 1).with_entry(EntryPoints::Fixed(vec![]));
        assert!(beam_search(&g, &ds, &[0.0], &none).is_err());
    }

    #[test]
    fn iteration_guard_bounds_hops() {
        let (ds, q) = generate_synthetic(&SyntheticSpec::new(300, 4, 1, 2, 5), Metric::L2).unwrap();
        let g = build_exact_knn(&ds, 8).unwrap();
        let mut params = SearchParams::new(50, 5);
        params.max_iterations = Some(3);
        for qi in 0..q.len() {
            let r = beam_search(&g, &ds, q.row(qi), &params).unwrap();
            assert!(r.stats.hops <= 3);
        }
    }

    #[test]
    fn full_pool_matches_ground_truth() {
        let (ds, q) = generate_synthetic(&SyntheticSpec::new(200, 4, 9, 10, 30), Metric::L2).unwrap();
        let g = build_exact_knn(&ds, 16).unwrap();
        let gt = exact_ground_truth(&ds, &q, 10).unwrap();
        let params = SearchParams::new(200, 10);
        let results = batch_search(&g, &ds, &q, &params).unwrap();
        for (i, r) in results.iter().enumerate() {
            assert_eq!(r.ids, gt.ids(i));
            for (&id, &d) in r.ids.iter().zip(&r.distances) {
                assert_eq!(d, ds.distance_to(q.row(i), id));
            }
            assert!(r.distances.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn permuted_index_gives_same_distances() {
        let (ds, q) = generate_synthetic(&SyntheticSpec::new(500, 8, 21, 22, 40), Metric::L2).unwrap();
        let g = build_exact_knn(&ds, 10).unwrap();
        let p = random_order(500, 5).unwrap();
        let (pg, pds) = apply_permutation(&g, &ds, &p).unwrap();
        let params = SearchParams::new(30, 10).with_seed(3);
        let mapped = params.mapped_through(&p).unwrap();
        for i in 0..q.len() {
            let a = beam_search(&g, &ds, q.row(i), &params).unwrap();
            let b = beam_search(&pg, &pds, q.row(i), &mapped).unwrap();
            assert_eq!(a.distances, b.distances);
            let mapped_ids: Vec<_> = a.ids.iter().map(|&x| p.apply(x)).collect();
            assert_eq!(mapped_ids, b.ids);
            assert_eq!(a.stats, b.stats);
        }
    }

    #[test]
    fn batch_matches_singletons_and_worker_counts() {
        let (ds, q) = generate_synthetic(&SyntheticSpec::new(2000, 8, 31, 32, 1000), Metric::L2).unwrap();
        let g = build_exact_knn(&ds, 12).unwrap();
        let params = SearchParams::new(40, 10).with_entry(EntryPoints::Random { count: 2 });
        let one = Executor::new(Some(1)).unwrap().batch_search(&g, &ds, &q, &params).unwrap();
        let many = Executor::new(Some(4)).unwrap().batch_search(&g, &ds, &q, &params).unwrap();
        assert_eq!(one, many);
        for (i, r) in one.iter().enumerate() {
            assert_eq!(r, &beam_search(&g, &ds, q.row(i), &params).unwrap());
        }
    }

    #[test]
    fn repeated_query_gives_identical_results() {
        let (ds, q) = generate_synthetic(&SyntheticSpec::new(300, 4, 41, 42, 1), Metric::L2).unwrap();
        let g = build_exact_knn(&ds, 8).unwrap();
        let rep = q.select(&vec![0; 100]).unwrap();
        let res = batch_search(&g, &ds, &rep, &SearchParams::new(20, 5)).unwrap();
        assert!(res.windows(2).all(|w| w[0] == w[1]));
    }
}
