use crate::error::{Error, Result};
use crate::graph::{FixedDegreeGraph, Permutation, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeDirection {
    In,
    Out,
}

fn degrees(g: &FixedDegreeGraph, dir: DegreeDirection) -> Vec<u32> {
    match dir {
        DegreeDirection::In => g.in_degrees(),
        DegreeDirection::Out => g.degrees().to_vec(),
    }
}

/// Vertices sorted by degree, highest first; equal degrees keep their
/// original relative order. `π(v)` is `v`'s rank.
pub fn degree_sort(g: &FixedDegreeGraph, dir: DegreeDirection) -> Permutation {
    let deg = degrees(g, dir);
    let mut order: Vec<VertexId> = (0..g.len() as VertexId).collect();
    order.sort_by(|&a, &b| deg[b as usize].cmp(&deg[a as usize]));
    Permutation::from_order(&order).expect("sorted ids form a permutation")
}

pub fn mean_in_degree(g: &FixedDegreeGraph) -> f64 {
    if g.is_empty() {
        0.0
    } else {
        g.edge_count() as f64 / g.len() as f64
    }
}

/// Hubs (in-degree strictly above `threshold`) take the lowest ids, then all
/// other vertices; both groups keep ascending original order.
pub fn hub_sort(g: &FixedDegreeGraph, threshold: f64) -> Result<Permutation> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::contract(format!("hub threshold {threshold} must be >= 0")));
    }
    let indeg = g.in_degrees();
    let (hubs, rest): (Vec<VertexId>, Vec<VertexId>) =
        (0..g.len() as VertexId).partition(|&v| indeg[v as usize] as f64 > threshold);
    let order: Vec<VertexId> = hubs.into_iter().chain(rest).collect();
    Permutation::from_order(&order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reorder::test_graphs::random_graph;
    use proptest::prelude::*;

    fn star() -> FixedDegreeGraph {
        FixedDegreeGraph::from_rows(3, &[vec![1u32, 2, 3], vec![], vec![], vec![]]).unwrap()
    }

    fn cycle(n: u32) -> FixedDegreeGraph {
        let rows: Vec<Vec<u32>> = (0..n).map(|v| vec![(v + 1) % n]).collect();
        FixedDegreeGraph::from_rows(1, &rows).unwrap()
    }

    #[test]
    fn star_out_degree() {
        assert_eq!(degree_sort(&star(), DegreeDirection::Out).forward(), &[0, 1, 2, 3]);
    }

    #[test]
    fn star_in_degree() {
        assert_eq!(degree_sort(&star(), DegreeDirection::In).forward(), &[3, 0, 1, 2]);
    }

    #[test]
    fn equal_degrees_keep_identity() {
        assert!(degree_sort(&cycle(7), DegreeDirection::In).is_identity());
        assert!(degree_sort(&cycle(7), DegreeDirection::Out).is_identity());
    }

    #[test]
    fn hub_sort_examples() {
        let g = cycle(5);
        assert!(hub_sort(&g, 3.0).unwrap().is_identity());
        assert!(hub_sort(&g, 0.0).unwrap().is_identity());
        let p = hub_sort(&star(), 0.5).unwrap();
        assert_eq!(p.forward(), &[3, 0, 1, 2]);
        assert_eq!(p.apply(0), 3);
        assert!(hub_sort(&g, -1.0).is_err());
        assert!(hub_sort(&g, f64::NAN).is_err());
        assert_eq!(mean_in_degree(&star()), 0.75);
    }

    proptest! {
        #[test]
        fn degree_sequence_non_increasing(n in 1usize..80, k in 1usize..8, seed: u64) {
            let g = random_graph(n, k, seed);
            for dir in [DegreeDirection::In, DegreeDirection::Out] {
                let deg = degrees(&g, dir);
                let p = degree_sort(&g, dir);
                let seq: Vec<u32> = (0..n as u32).map(|r| deg[p.apply_inverse(r) as usize]).collect();
                prop_assert!(seq.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }
}
