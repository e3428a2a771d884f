//! Structural metrics over graph indices: clustering coefficients on the
//! symmetrized graph, labeling bandwidth, weak components, and Spearman rank
//! correlation for relating structure to measured speed-ups.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FixedDegreeGraph, Permutation, VertexId};

pub const LCC_HISTOGRAM_BINS: usize = 20;

fn intersection_size(a: &[VertexId], b: &[VertexId]) -> u64 {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

fn lcc_in(adj: &[Vec<VertexId>], v: usize) -> f64 {
    let nv = &adj[v];
    let k = nv.len() as u64;
    if k < 2 {
        return 0.0;
    }
    // each triangle through v is seen once from each of its two other corners
    let twice_t: u64 = nv.iter().map(|&u| intersection_size(&adj[u as usize], nv)).sum();
    twice_t as f64 / (k * (k - 1)) as f64
}

/// `C_v = 2 T_v / (k_v (k_v - 1))` on the undirected view, `0` when
/// `k_v < 2`.
pub fn local_clustering_coefficient(g: &FixedDegreeGraph, v: VertexId) -> Result<f64> {
    if v as usize >= g.len() {
        return Err(Error::contract(format!("vertex {v} out of range (n = {})", g.len())));
    }
    Ok(lcc_in(&g.undirected_adjacency(), v as usize))
}

/// Clustering coefficient of every vertex.
pub fn local_clustering_coefficients(g: &FixedDegreeGraph) -> Vec<f64> {
    let adj = g.undirected_adjacency();
    (0..adj.len()).into_par_iter().map(|v| lcc_in(&adj, v)).collect()
}

/// Pairwise (cascade) summation; the split points depend only on length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Mean clustering coefficient over all vertices, including those with
/// `C_v = 0`.
///
/// Values are summed in sorted order, so the result is exactly invariant under
/// relabeling.
pub fn average_lcc(g: &FixedDegreeGraph) -> f64 {
    mean_sorted(local_clustering_coefficients(g))
}

fn mean_sorted(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    pairwise_sum(&xs) / xs.len() as f64
}

#[inline]
fn label(labeling: Option<&Permutation>, v: VertexId) -> i64 {
    labeling.map_or(v, |p| p.apply(v)) as i64
}

/// Largest `|label(u) - label(v)|` over edges; the current ids when
/// `labeling` is `None`.
pub fn bandwidth(g: &FixedDegreeGraph, labeling: Option<&Permutation>) -> u64 {
    g.edges()
        .map(|(u, v)| (label(labeling, u) - label(labeling, v)).unsigned_abs())
        .max()
        .unwrap_or(0)
}

/// Mean `|label(u) - label(v)|` over edges (0 for edgeless graphs).
pub fn mean_edge_gap(g: &FixedDegreeGraph, labeling: Option<&Permutation>) -> f64 {
    let gaps: Vec<f64> = g
        .edges()
        .map(|(u, v)| (label(labeling, u) - label(labeling, v)).unsigned_abs() as f64)
        .collect();
    if gaps.is_empty() {
        0.0
    } else {
        pairwise_sum(&gaps) / gaps.len() as f64
    }
}

/// Number of weakly connected components.
pub fn weak_components(g: &FixedDegreeGraph) -> usize {
    let n = g.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut count = n;
    for (u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
        if a != b {
            parent[a.max(b)] = a.min(b);
            count -= 1;
        }
    }
    count
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's `r_s`: Pearson correlation of the average-rank vectors.
///
/// A series whose ranks are all equal makes `r_s` undefined; that is
/// reported as [`Error::Undefined`] rather than NaN.
pub fn spearman_rank_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::contract(format!(
            "spearman needs two series of equal length >= 2 (got {} and {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|x| x.is_nan()) {
        return Err(Error::contract("spearman input contains NaN"));
    }
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("rank variance is zero (all values tied)".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub min: u32,
    pub mean: f64,
    pub max: u32,
}

impl DegreeSummary {
    fn of(deg: &[u32]) -> Self {
        let mean = if deg.is_empty() {
            0.0
        } else {
            deg.iter().map(|&d| d as u64).sum::<u64>() as f64 / deg.len() as f64
        };
        Self {
            min: deg.iter().copied().min().unwrap_or(0),
            mean,
            max: deg.iter().copied().max().unwrap_or(0),
        }
    }
}

/// Structural summary of a graph under its current labeling. Field order is
/// the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub n: usize,
    pub k_max: usize,
    pub edges: usize,
    pub in_degree: DegreeSummary,
    pub out_degree: DegreeSummary,
    /// Clustering is computed on the symmetrized (undirected) graph.
    pub lcc_view: String,
    pub average_lcc: f64,
    /// Counts of `C_v` over 20 equal bins on `[0, 1]`; `1.0` lands in the last.
    pub lcc_histogram: Vec<u64>,
    pub bandwidth: u64,
    pub weak_components: usize,
    pub mean_edge_gap: f64,
}

impl GraphReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn analyze(g: &FixedDegreeGraph) -> GraphReport {
    let lcc = local_clustering_coefficients(g);
    let mut hist = vec![0u64; LCC_HISTOGRAM_BINS];
    for &c in &lcc {
        let bin = ((c * LCC_HISTOGRAM_BINS as f64) as usize).min(LCC_HISTOGRAM_BINS - 1);
        hist[bin] += 1;
    }
    GraphReport {
        n: g.len(),
        k_max: g.k_max(),
        edges: g.edge_count(),
        in_degree: DegreeSummary::of(&g.in_degrees()),
        out_degree: DegreeSummary::of(g.degrees()),
        lcc_view: "symmetrized".into(),
        average_lcc: mean_sorted(lcc),
        lcc_histogram: hist,
        bandwidth: bandwidth(g, None),
        weak_components: weak_components(g),
        mean_edge_gap: mean_edge_gap(g, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reorder::random_order;
    use crate::reorder::test_graphs::{random_graph, undirected};
    use proptest::prelude::*;

    fn triangle() -> FixedDegreeGraph {
        undirected(3, &[(0, 1), (1, 2), (0, 2)])
    }

    #[test]
    fn lcc_examples() {
        for v in 0..3 {
            assert_eq!(local_clustering_coefficient(&triangle(), v).unwrap(), 1.0);
        }
        let star = undirected(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(local_clustering_coefficient(&star, 0).unwrap(), 0.0);
        assert_eq!(average_lcc(&star), 0.0);
        assert!(local_clustering_coefficient(&star, 4).is_err());
        let two = undirected(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        assert_eq!(average_lcc(&two), 1.0);
        let matching = undirected(6, &[(0, 1), (2, 3), (4, 5)]);
        assert_eq!(average_lcc(&matching), 0.0);
    }

    #[test]
    fn directed_edges_are_symmetrized() {
        // one-way triangle still closes every neighborhood
        let g = FixedDegreeGraph::from_rows(1, &[vec![1u32], vec![2], vec![0]]).unwrap();
        assert_eq!(average_lcc(&g), 1.0);
    }

    /// Brute force: test every neighbor pair for adjacency in either direction.
    fn brute_lcc(g: &FixedDegreeGraph, v: u32) -> f64 {
        let linked = |a: u32, b: u32| g.neighbors(a).contains(&b) || g.neighbors(b).contains(&a);
        let nb: Vec<u32> = (0..g.len() as u32).filter(|&u| u != v && linked(u, v)).collect();
        let k = nb.len();
        if k < 2 {
            return 0.0;
        }
        let mut t = 0;
        for i in 0..k {
            for j in i + 1..k {
                if linked(nb[i], nb[j]) {
                    t += 1;
                }
            }
        }
        2.0 * t as f64 / (k * (k - 1)) as f64
    }

    #[test]
    fn lcc_matches_brute_force() {
        for seed in 0..10 {
            let g = random_graph(200, 6, seed);
            let fast = local_clustering_coefficients(&g);
            for v in 0..200u32 {
                assert!((fast[v as usize] - brute_lcc(&g, v)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn erdos_renyi_average_matches_brute_force() {
        use rand::Rng;
        let mut r = crate::rng::seeded(5);
        let mut edges = Vec::new();
        for a in 0..300u32 {
            for b in a + 1..300 {
                if r.random::<f64>() < 0.05 {
                    edges.push((a, b));
                }
            }
        }
        let g = undirected(300, &edges);
        let brute: f64 = (0..300u32).map(|v| brute_lcc(&g, v)).sum::<f64>() / 300.0;
        assert!((average_lcc(&g) - brute).abs() < 1e-12);
    }

    #[test]
    fn bandwidth_examples() {
        let path = undirected(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(bandwidth(&path, None), 1);
        let rev = Permutation::from_forward(vec![4, 3, 2, 1, 0]).unwrap();
        assert_eq!(bandwidth(&path, Some(&rev)), 1);
        let empty = FixedDegreeGraph::from_rows(1, &[Vec::<u32>::new(), vec![]]).unwrap();
        assert_eq!(bandwidth(&empty, None), 0);
        assert_eq!(mean_edge_gap(&empty, None), 0.0);
        assert_eq!(mean_edge_gap(&path, None), 1.0);
    }

    #[test]
    fn components() {
        assert_eq!(weak_components(&undirected(5, &[(0, 1), (3, 4)])), 3);
        assert_eq!(weak_components(&triangle()), 1);
    }

    #[test]
    fn spearman_examples() {
        let r = spearman_rank_correlation(&[1.0, 2.0, 3.0, 4.0], &[10.0, 30.0, 20.0, 40.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
        assert_eq!(spearman_rank_correlation(&[1.0, 2.0, 3.0], &[2.0, 5.0, 9.0]).unwrap(), 1.0);
        assert_eq!(spearman_rank_correlation(&[1.0, 2.0, 3.0], &[9.0, 5.0, 2.0]).unwrap(), -1.0);
        assert!(matches!(
            spearman_rank_correlation(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]),
            Err(Error::Undefined(_))
        ));
        assert!(spearman_rank_correlation(&[1.0], &[1.0]).is_err());
        assert!(spearman_rank_correlation(&[1.0, 2.0], &[1.0]).is_err());
        // ties take average ranks: ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4)
        let t = spearman_rank_correlation(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((t - 4.5 / (4.5f64 * 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn report_shape() {
        let r = analyze(&undirected(6, &[(0, 1), (1, 2), (0, 2), (3, 4)]));
        assert_eq!(r.lcc_histogram.iter().sum::<u64>(), 6);
        assert_eq!(r.lcc_histogram[19], 3);
        assert_eq!(r.weak_components, 3);
        let json = r.to_json().unwrap();
        let keys: Vec<&str> = ["\"n\"", "\"k_max\"", "\"edges\"", "\"average_lcc\"", "\"bandwidth\""]
            .into_iter()
            .collect();
        let pos: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let back: GraphReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    proptest! {
        #[test]
        fn lcc_is_permutation_invariant(n in 2usize..80, k in 1usize..6, seed: u64) {
            let g = random_graph(n, k, seed);
            let p = random_order(n, seed ^ 0x55).unwrap();
            let h = g.permuted(&p).unwrap();
            let (a, b) = (local_clustering_coefficients(&g), local_clustering_coefficients(&h));
            for v in 0..n as u32 {
                prop_assert_eq!(a[v as usize], b[p.apply(v) as usize]);
            }
            prop_assert_eq!(average_lcc(&g), average_lcc(&h));
        }

        #[test]
        fn spearman_monotone_invariance(xs in proptest::collection::vec(-100.0f64..100.0, 3..30), seed: u64) {
            use rand::Rng;
            let mut r = crate::rng::seeded(seed);
            let ys: Vec<f64> = xs.iter().map(|_| r.random_range(-5.0..5.0)).collect();
            if let Ok(base) = spearman_rank_correlation(&xs, &ys) {
                let tx: Vec<f64> = xs.iter().map(|x| x * 4.0).collect();
                let ty: Vec<f64> = ys.iter().map(|y| y * y * y).collect();
                let t = spearman_rank_correlation(&tx, &ty).unwrap();
                prop_assert!((base - t).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&base));
            }
        }
    }
}
