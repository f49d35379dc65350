#![allow(dead_code)]

pub mod invariants;

use std::collections::{BTreeSet, VecDeque};

use ndorder::dist_graph::DistGraph;
use ndorder::Graph;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Column counts by dense boolean elimination, independent of the library.
pub fn dense_counts(graph: &Graph, order: &[usize]) -> Vec<usize> {
    let n = graph.vertex_count();
    let mut pos = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let mut m = vec![vec![false; n]; n];
    for v in 0..n {
        for &u in graph.neighbors(v) {
            m[pos[v]][pos[u]] = true;
        }
    }
    let mut counts = Vec::with_capacity(n);
    for k in 0..n {
        let below: Vec<usize> = (k + 1..n).filter(|&i| m[i][k]).collect();
        counts.push(below.len() + 1);
        for &a in &below {
            for &b in &below {
                if a != b {
                    m[a][b] = true;
                }
            }
        }
    }
    counts
}

pub fn opc(counts: &[usize]) -> u64 {
    counts.iter().map(|&c| (c * c) as u64).sum()
}

pub fn nnz(counts: &[usize]) -> u64 {
    counts.iter().map(|&c| c as u64).sum()
}

/// Random simple graph with `n` vertices and about `density * n` edges.
pub fn random_graph(n: usize, density: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = ((n as f64) * density) as usize;
    let mut edges = BTreeSet::new();
    let max = n * n.saturating_sub(1) / 2;
    while edges.len() < target.min(max) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    Graph::from_edges(n, &edges.into_iter().collect::<Vec<_>>()).unwrap()
}

/// Hop distance from the nearest flagged vertex, `usize::MAX` if unreachable.
pub fn bfs_dist(graph: &Graph, sources: &[bool]) -> Vec<usize> {
    let n = graph.vertex_count();
    let mut d = vec![usize::MAX; n];
    let mut q = VecDeque::new();
    for v in 0..n {
        if sources[v] {
            d[v] = 0;
            q.push_back(v);
        }
    }
    while let Some(v) = q.pop_front() {
        for &u in graph.neighbors(v) {
            if d[u] == usize::MAX {
                d[u] = d[v] + 1;
                q.push_back(u);
            }
        }
    }
    d
}

/// No edge joins part 0 and part 1.
pub fn is_separator(graph: &Graph, parts: &[u8]) -> bool {
    (0..graph.vertex_count()).all(|v| {
        parts[v] == 2 || graph.neighbors(v).iter().all(|&u| parts[u] == 2 || parts[u] == parts[v])
    })
}

/// Edges of all fragments as sorted pairs of original vertex numbers, with weights.
pub fn canonical_edges(frags: &[DistGraph]) -> Vec<(usize, usize, i64)> {
    let mut vnum_of = std::collections::BTreeMap::new();
    for f in frags {
        for v in 0..f.local_count() {
            vnum_of.insert(f.first_global() + v, f.vnum()[v]);
        }
    }
    let mut out = Vec::new();
    for f in frags {
        for v in 0..f.local_count() {
            let a = f.vnum()[v];
            for (&u, &w) in f.neighbors_glb(v).iter().zip(f.edge_weights(v)) {
                out.push((a, vnum_of[&u], w));
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn grid_edges(k: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for r in 0..k {
        for c in 0..k {
            let v = r * k + c;
            if c + 1 < k {
                e.push((v, v + 1));
            }
            if r + 1 < k {
                e.push((v, v + k));
            }
        }
    }
    e
}
