use std::collections::VecDeque;

use crate::graph::{FixedDegreeGraph, Permutation, VertexId};

/// Reverse Cuthill–McKee on the symmetrized graph.
///
/// Each component is rooted at its unvisited vertex of minimum degree; BFS
/// enqueues neighbors by ascending `(degree, id)`. The concatenated visit
/// order is reversed to give the final positions.
pub fn rcm(g: &FixedDegreeGraph) -> Permutation {
    let adj = g.undirected_adjacency();
    let n = adj.len();
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut roots: Vec<VertexId> = (0..n as VertexId).collect();
    roots.sort_by_key(|&v| (deg[v as usize], v));

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut frontier = Vec::new();
    for &root in &roots {
        if visited[root as usize] {
            continue;
        }
        visited[root as usize] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            frontier.clear();
            frontier.extend(adj[v as usize].iter().copied().filter(|&u| !visited[u as usize]));
            frontier.sort_by_key(|&u| (deg[u as usize], u));
            for &u in &frontier {
                visited[u as usize] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    Permutation::from_order(&order).expect("BFS visits every vertex once")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::bandwidth;
    use crate::reorder::random_order;
    use crate::reorder::test_graphs::undirected;

    #[test]
    fn scrambled_path_gets_unit_bandwidth() {
        // path 0-1-2-3 stored as 2-0-3-1
        let g = undirected(4, &[(2, 0), (0, 3), (3, 1)]);
        let p = rcm(&g);
        assert_eq!(bandwidth(&g, Some(&p)), 1);
    }

    #[test]
    fn complete_graph_bandwidth_is_fixed() {
        let edges: Vec<(u32, u32)> = (0..6u32).flat_map(|a| (a + 1..6).map(move |b| (a, b))).collect();
        let g = undirected(6, &edges);
        assert_eq!(bandwidth(&g, Some(&rcm(&g))), 5);
        assert_eq!(bandwidth(&g, None), 5);
    }

    #[test]
    fn shuffled_band_graph_is_narrowed() {
        let n = 200u32;
        let edges: Vec<(u32, u32)> = (0..n).flat_map(|a| (a + 1..(a + 6).min(n)).map(move |b| (a, b))).collect();
        let band = undirected(n as usize, &edges);
        let shuffled = band.permuted(&random_order(n as usize, 4).unwrap()).unwrap();
        let before = bandwidth(&shuffled, None);
        let after = bandwidth(&shuffled, Some(&rcm(&shuffled)));
        assert!(after <= before);
        assert!(after <= 10, "{after}");
    }

    #[test]
    fn handles_isolated_vertices_and_components() {
        let g = undirected(5, &[(0, 1), (3, 4)]);
        let p = rcm(&g);
        // vertex 2 (degree 0) is rooted first, so it ends up last
        assert_eq!(p.apply(2), 4);
    }
}
