//! Core domain types: vector sets, the fixed-degree graph layout every index
//! is normalized into, and vertex permutations.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex identifier. 32 bits covers ten-million-vector indices with headroom.
pub type VertexId = u32;

/// Marker stored in every unused neighbor slot.
pub const INVALID: VertexId = VertexId::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Squared Euclidean distance.
    L2,
    /// Negated dot product, so that smaller is always closer.
    InnerProduct,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::L2 => f.write_str("l2"),
            Metric::InnerProduct => f.write_str("inner-product"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" | "euclidean" => Ok(Metric::L2),
            "ip" | "inner-product" | "inner_product" | "innerproduct" => Ok(Metric::InnerProduct),
            other => Err(Error::contract(format!("unknown metric `{other}`"))),
        }
    }
}

#[inline]
pub(crate) fn l2_squared(a: &[f32], b: &[f32]) -> f32 {
    let mut sum = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        sum += d * d;
    }
    sum
}

#[inline]
pub(crate) fn negated_dot(a: &[f32], b: &[f32]) -> f32 {
    let mut sum = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        sum += x * y;
    }
    -sum
}

impl Metric {
    /// Distance without the dimension check. Summation runs sequentially over
    /// components, so results are bit-reproducible.
    #[inline]
    pub fn eval(self, a: &[f32], b: &[f32]) -> f32 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::L2 => l2_squared(a, b),
            Metric::InnerProduct => negated_dot(a, b),
        }
    }
}

/// Checked distance between two vectors under `metric`.
pub fn distance(a: &[f32], b: &[f32], metric: Metric) -> Result<f32> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(metric.eval(a, b))
}

/// Orders `(distance, id)` pairs totally: by distance, then by ascending id.
#[inline]
pub fn cmp_dist_id(a: (f32, VertexId), b: (f32, VertexId)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Dense row-major matrix of `f32` vectors. Used both for databases and query
/// sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Vectors {
    n: usize,
    dim: usize,
    data: Vec<f32>,
}

impl Vectors {
    pub fn new(dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::contract("dimensionality must be at least 1"));
        }
        if data.is_empty() {
            return Err(Error::contract("vector set must hold at least one vector"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::contract(format!(
                "data length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::contract(format!(
                "non-finite component at vector {}, component {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self {
            n: data.len() / dim,
            dim,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::contract(format!(
                    "row {i} has dimension {}, expected {dim}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, data)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.data
    }

    /// Copies out the rows selected by `ids`, in that order.
    pub fn select(&self, ids: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(ids.len() * self.dim);
        for &i in ids {
            if i >= self.n {
                return Err(Error::contract(format!("row {i} out of range")));
            }
            data.extend_from_slice(self.row(i));
        }
        Self::new(self.dim, data)
    }
}

/// The database: `n` vectors of dimension `d` plus the metric they are
/// compared under.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDataset {
    vectors: Vectors,
    metric: Metric,
}

impl VectorDataset {
    pub fn new(vectors: Vectors, metric: Metric) -> Self {
        Self { vectors, metric }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    #[inline]
    pub fn metric(&self) -> Metric {
        self.metric
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        self.vectors.row(i)
    }

    pub fn vectors(&self) -> &Vectors {
        &self.vectors
    }

    /// Distance from a query (unchecked length) to database vector `i`.
    #[inline]
    pub fn distance_to(&self, query: &[f32], i: VertexId) -> f32 {
        self.metric.eval(query, self.row(i as usize))
    }

    /// Distance between two database vectors.
    #[inline]
    pub fn pair_distance(&self, a: VertexId, b: VertexId) -> f32 {
        self.metric.eval(self.row(a as usize), self.row(b as usize))
    }

    /// Returns the dataset with row `π(i)` holding input row `i`.
    pub fn permuted(&self, perm: &Permutation) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::contract(format!(
                "permutation length {} does not match dataset size {}",
                perm.len(),
                self.len()
            )));
        }
        let dim = self.dim();
        let mut data = vec![0.0f32; self.len() * dim];
        for (i, row) in self.vectors.iter().enumerate() {
            let dst = perm.apply(i as VertexId) as usize;
            data[dst * dim..(dst + 1) * dim].copy_from_slice(row);
        }
        Ok(Self {
            vectors: Vectors {
                n: self.len(),
                dim,
                data,
            },
            metric: self.metric,
        })
    }
}

/// Fixed-slot adjacency: `n` rows of `k_max` neighbor slots each.
///
/// Valid neighbors are left-packed; slots at or beyond `degree(v)` hold
/// [`INVALID`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedDegreeGraph {
    n: usize,
    k_max: usize,
    neighbors: Vec<VertexId>,
    degrees: Vec<u32>,
}

impl FixedDegreeGraph {
    /// Builds a graph from per-vertex neighbor lists, keeping list order.
    pub fn from_rows<R: AsRef<[VertexId]>>(k_max: usize, rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut neighbors = vec![INVALID; n * k_max];
        let mut degrees = Vec::with_capacity(n);
        for (v, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() > k_max {
                return Err(Error::contract(format!(
                    "vertex {v} has {} neighbors, more than k_max = {k_max}",
                    row.len()
                )));
            }
            neighbors[v * k_max..v * k_max + row.len()].copy_from_slice(row);
            degrees.push(row.len() as u32);
        }
        let g = Self {
            n,
            k_max,
            neighbors,
            degrees,
        };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph from raw slot and degree arrays, validating every
    /// invariant.
    pub fn from_raw(
        n: usize,
        k_max: usize,
        neighbors: Vec<VertexId>,
        degrees: Vec<u32>,
    ) -> Result<Self> {
        if neighbors.len() != n * k_max || degrees.len() != n {
            return Err(Error::contract(format!(
                "slot array length {} / degree array length {} inconsistent with n = {n}, k_max = {k_max}",
                neighbors.len(),
                degrees.len()
            )));
        }
        let g = Self {
            n,
            k_max,
            neighbors,
            degrees,
        };
        g.validate()?;
        Ok(g)
    }

    /// Checks range, sentinel, self-loop and duplicate invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n > INVALID as usize {
            return Err(Error::contract("too many vertices for 32-bit ids"));
        }
        let mut seen = HashSet::new();
        for v in 0..self.n {
            let deg = self.degrees[v] as usize;
            if deg > self.k_max {
                return Err(Error::contract(format!(
                    "vertex {v}: degree {deg} exceeds k_max {}",
                    self.k_max
                )));
            }
            let slots = self.slots(v as VertexId);
            seen.clear();
            for (s, &u) in slots.iter().enumerate() {
                if s < deg {
                    if u as usize >= self.n {
                        return Err(Error::contract(format!(
                            "vertex {v}, slot {s}: neighbor {u} out of range"
                        )));
                    }
                    if u as usize == v {
                        return Err(Error::contract(format!("vertex {v}, slot {s}: self-loop")));
                    }
                    if !seen.insert(u) {
                        return Err(Error::contract(format!(
                            "vertex {v}, slot {s}: duplicate neighbor {u}"
                        )));
                    }
                } else if u != INVALID {
                    return Err(Error::contract(format!(
                        "vertex {v}, slot {s}: slot past degree is not INVALID"
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.degrees[v as usize] as usize
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Valid neighbors of `v`.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let start = v as usize * self.k_max;
        &self.neighbors[start..start + self.degrees[v as usize] as usize]
    }

    /// All `k_max` slots of `v`, including padding.
    #[inline]
    pub fn slots(&self, v: VertexId) -> &[VertexId] {
        let start = v as usize * self.k_max;
        &self.neighbors[start..start + self.k_max]
    }

    pub fn raw_slots(&self) -> &[VertexId] {
        &self.neighbors
    }

    pub fn edge_count(&self) -> usize {
        self.degrees.iter().map(|&d| d as usize).sum()
    }

    /// Directed edges `(u, v)` in row order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.n as VertexId).flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
    }

    pub fn in_degrees(&self) -> Vec<u32> {
        let mut indeg = vec![0u32; self.n];
        for (_, v) in self.edges() {
            indeg[v as usize] += 1;
        }
        indeg
    }

    /// Reverse adjacency lists; each list is ascending by source id.
    pub fn in_neighbors(&self) -> Vec<Vec<VertexId>> {
        let mut rev = vec![Vec::new(); self.n];
        for (u, v) in self.edges() {
            rev[v as usize].push(u);
        }
        rev
    }

    /// Undirected view: `u ~ v` iff an edge runs either way. Lists are sorted
    /// and deduplicated.
    pub fn undirected_adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.n];
        for (u, v) in self.edges() {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for row in adj.iter_mut() {
            row.sort_unstable();
            row.dedup();
        }
        adj
    }

    /// Relabels every vertex through `perm`. Row `π(i)` holds the images of
    /// `i`'s neighbors, sorted ascending.
    pub fn permuted(&self, perm: &Permutation) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::contract(format!(
                "permutation length {} does not match graph size {}",
                perm.len(),
                self.n
            )));
        }
        let k = self.k_max;
        let mut neighbors = vec![INVALID; self.n * k];
        let mut degrees = vec![0u32; self.n];
        for v in 0..self.n as VertexId {
            let dst = perm.apply(v) as usize;
            let row = &mut neighbors[dst * k..(dst + 1) * k];
            let deg = self.degree(v);
            for (slot, &u) in row.iter_mut().zip(self.neighbors(v)) {
                *slot = perm.apply(u);
            }
            row[..deg].sort_unstable();
            degrees[dst] = deg as u32;
        }
        Ok(Self {
            n: self.n,
            k_max: k,
            neighbors,
            degrees,
        })
    }
}

/// Relocates every vertex `i` (graph row and vector) to position `π(i)`.
pub fn apply_permutation(
    graph: &FixedDegreeGraph,
    dataset: &VectorDataset,
    perm: &Permutation,
) -> Result<(FixedDegreeGraph, VectorDataset)> {
    if graph.len() != dataset.len() {
        return Err(Error::contract(format!(
            "graph has {} vertices but dataset has {} vectors",
            graph.len(),
            dataset.len()
        )));
    }
    Ok((graph.permuted(perm)?, dataset.permuted(perm)?))
}

/// A bijection on `[0, n)`. `forward[i]` is the new id of vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<VertexId>,
    inverse: Vec<VertexId>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        let forward: Vec<VertexId> = (0..n as VertexId).collect();
        Self {
            inverse: forward.clone(),
            forward,
        }
    }

    /// Validates that `forward` is a bijection and builds the inverse.
    pub fn from_forward(forward: Vec<VertexId>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![INVALID; n];
        for (i, &p) in forward.iter().enumerate() {
            if p as usize >= n {
                return Err(Error::contract(format!(
                    "permutation entry {i} maps to {p}, outside [0, {n})"
                )));
            }
            if inverse[p as usize] != INVALID {
                return Err(Error::contract(format!(
                    "permutation maps both {} and {i} to {p}",
                    inverse[p as usize]
                )));
            }
            inverse[p as usize] = i as VertexId;
        }
        Ok(Self { forward, inverse })
    }

    /// Builds π from a placement order: `order[r]` is the vertex placed at
    /// position `r`, so `π(order[r]) = r`.
    pub fn from_order(order: &[VertexId]) -> Result<Self> {
        let n = order.len();
        let mut forward = vec![INVALID; n];
        for (rank, &v) in order.iter().enumerate() {
            if v as usize >= n || forward[v as usize] != INVALID {
                return Err(Error::contract(format!(
                    "placement order is not a permutation (entry {rank} = {v})"
                )));
            }
            forward[v as usize] = rank as VertexId;
        }
        Self::from_forward(forward)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: VertexId) -> VertexId {
        self.forward[i as usize]
    }

    #[inline]
    pub fn apply_inverse(&self, j: VertexId) -> VertexId {
        self.inverse[j as usize]
    }

    pub fn forward(&self) -> &[VertexId] {
        &self.forward
    }

    pub fn inverse_slice(&self) -> &[VertexId] {
        &self.inverse
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &p)| i as VertexId == p)
    }
}

/// Exact top-k neighbors per query, ascending by `(distance, id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    k: usize,
    ids: Vec<VertexId>,
    distances: Vec<f32>,
}

impl GroundTruth {
    pub fn new(k: usize, ids: Vec<VertexId>, distances: Vec<f32>) -> Result<Self> {
        if k == 0 || !ids.len().is_multiple_of(k) || ids.len() != distances.len() {
            return Err(Error::contract(format!(
                "ground truth arrays ({} ids, {} distances) inconsistent with k = {k}",
                ids.len(),
                distances.len()
            )));
        }
        Ok(Self { k, ids, distances })
    }

    /// Ground truth with ids only (e.g. loaded from ivecs); distances are NaN.
    pub fn from_ids(k: usize, ids: Vec<VertexId>) -> Result<Self> {
        let distances = vec![f32::NAN; ids.len()];
        Self::new(k, ids, distances)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_queries(&self) -> usize {
        self.ids.len() / self.k
    }

    pub fn ids(&self, q: usize) -> &[VertexId] {
        &self.ids[q * self.k..(q + 1) * self.k]
    }

    pub fn distances(&self, q: usize) -> &[f32] {
        &self.distances[q * self.k..(q + 1) * self.k]
    }

    pub fn all_ids(&self) -> &[VertexId] {
        &self.ids
    }
}
