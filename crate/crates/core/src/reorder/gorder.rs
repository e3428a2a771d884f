//! Greedy window-based locality ordering.
//!
//! The affinity of two vertices is the number of directed edges between them
//! (0 to 2) plus the number of in-neighbors they share. Vertices are placed
//! one at a time; the next one is the unplaced vertex with the largest total
//! affinity to the last `w` placed vertices (ties to the lower id). The first
//! vertex is the one with the highest in-degree.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{FixedDegreeGraph, Permutation, VertexId};

struct Scorer<'a> {
    g: &'a FixedDegreeGraph,
    in_adj: Vec<Vec<VertexId>>,
    key: Vec<i64>,
    placed: Vec<bool>,
    heap: BinaryHeap<(i64, Reverse<VertexId>)>,
}

impl Scorer<'_> {
    #[inline]
    fn bump(&mut self, u: VertexId, delta: i64) {
        let i = u as usize;
        if !self.placed[i] {
            self.key[i] += delta;
            self.heap.push((self.key[i], Reverse(u)));
        }
    }

    /// Adds (or, with `delta = -1`, removes) `v`'s affinity to every other
    /// vertex.
    fn contribute(&mut self, v: VertexId, delta: i64) {
        let g = self.g;
        for &u in g.neighbors(v) {
            self.bump(u, delta);
        }
        for i in 0..self.in_adj[v as usize].len() {
            let x = self.in_adj[v as usize][i];
            self.bump(x, delta);
            for &u in g.neighbors(x) {
                if u != v {
                    self.bump(u, delta);
                }
            }
        }
    }

    fn pop_best(&mut self) -> Option<VertexId> {
        while let Some((k, Reverse(u))) = self.heap.pop() {
            if !self.placed[u as usize] && self.key[u as usize] == k {
                return Some(u);
            }
        }
        None
    }
}

pub fn gorder(g: &FixedDegreeGraph, window: usize) -> Result<Permutation> {
    if window == 0 {
        return Err(Error::contract("GOrder window must be at least 1"));
    }
    let n = g.len();
    if n == 0 {
        return Permutation::from_order(&[]);
    }
    let in_adj = g.in_neighbors();
    let start = (0..n)
        .max_by(|&a, &b| in_adj[a].len().cmp(&in_adj[b].len()).then(b.cmp(&a)))
        .unwrap() as VertexId;
    let mut s = Scorer {
        g,
        in_adj,
        key: vec![0; n],
        placed: vec![false; n],
        heap: (0..n as VertexId).map(|v| (0, Reverse(v))).collect(),
    };
    let mut order = Vec::with_capacity(n);
    let mut recent: VecDeque<VertexId> = VecDeque::with_capacity(window + 1);
    let mut next = Some(start);
    while let Some(v) = next {
        s.placed[v as usize] = true;
        order.push(v);
        s.contribute(v, 1);
        recent.push_back(v);
        if recent.len() > window {
            let old = recent.pop_front().unwrap();
            s.contribute(old, -1);
        }
        next = s.pop_best();
    }
    debug_assert_eq!(order.len(), n);
    Permutation::from_order(&order)
}

fn affinity(g: &FixedDegreeGraph, in_adj: &[Vec<VertexId>], u: VertexId, v: VertexId) -> i64 {
    let direct = i64::from(g.neighbors(u).contains(&v)) + i64::from(g.neighbors(v).contains(&u));
    let (a, b) = (&in_adj[u as usize], &in_adj[v as usize]);
    let (mut i, mut j, mut shared) = (0, 0, 0i64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    direct + shared
}

/// Total affinity over all vertex pairs placed at most `window` positions
/// apart under `perm`.
pub fn windowed_score(g: &FixedDegreeGraph, perm: &Permutation, window: usize) -> i64 {
    let in_adj = g.in_neighbors();
    let order = perm.inverse_slice();
    let n = order.len();
    let mut total = 0;
    for i in 0..n {
        for j in i + 1..n.min(i + window + 1) {
            total += affinity(g, &in_adj, order[i], order[j]);
        }
    }
    total
}
