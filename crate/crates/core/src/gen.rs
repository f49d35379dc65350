//! Synthetic graph generators.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

/// k x k grid, vertices numbered row-major.
pub fn grid2d(k: usize) -> Graph {
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
    Graph::from_edges(k * k, &e).expect("grid edges are valid")
}

/// k x k x k grid, vertices numbered with x fastest.
pub fn grid3d(k: usize) -> Graph {
    let idx = |x: usize, y: usize, z: usize| (z * k + y) * k + x;
    let mut e = Vec::new();
    for z in 0..k {
        for y in 0..k {
            for x in 0..k {
                let v = idx(x, y, z);
                if x + 1 < k {
                    e.push((v, idx(x + 1, y, z)));
                }
                if y + 1 < k {
                    e.push((v, idx(x, y + 1, z)));
                }
                if z + 1 < k {
                    e.push((v, idx(x, y, z + 1)));
                }
            }
        }
    }
    Graph::from_edges(k * k * k, &e).expect("grid edges are valid")
}

/// Path on n vertices.
pub fn path(n: usize) -> Graph {
    let e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edges(n, &e).expect("path edges are valid")
}

/// Star on n vertices with center 0.
pub fn star(n: usize) -> Graph {
    let e: Vec<_> = (1..n).map(|i| (0, i)).collect();
    Graph::from_edges(n, &e).expect("star edges are valid")
}

/// Complete graph on n vertices.
pub fn complete(n: usize) -> Graph {
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            e.push((i, j));
        }
    }
    Graph::from_edges(n, &e).expect("clique edges are valid")
}

/// Uniform random simple graph with n vertices and min(m, n(n-1)/2) edges.
pub fn random(n: usize, m: usize, seed: u64) -> Graph {
    let max = n * n.saturating_sub(1) / 2;
    let m = m.min(max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = BTreeSet::new();
    while edges.len() < m {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let e: Vec<_> = edges.into_iter().collect();
    Graph::from_edges(n, &e).expect("random edges are valid")
}
