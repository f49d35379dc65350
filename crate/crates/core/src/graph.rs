//! Centralized compressed-adjacency graph.

use crate::error::{Error, Result};

/// Symmetric graph in compressed adjacency form with vertex and edge weights.
///
/// Vertex `v`'s neighbors are `adjncy[xadj[v]..xadj[v + 1]]`, with matching
/// weights in `ewgt`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    pub xadj: Vec<usize>,
    pub adjncy: Vec<usize>,
    pub vwgt: Vec<i64>,
    pub ewgt: Vec<i64>,
}

impl Graph {
    /// Builds a graph from per-vertex neighbor lists with unit weights.
    pub fn from_adjacency(lists: &[Vec<usize>]) -> Result<Graph> {
        Graph::from_adjacency_weighted(lists, vec![1; lists.len()])
    }

    pub fn from_adjacency_weighted(lists: &[Vec<usize>], vwgt: Vec<i64>) -> Result<Graph> {
        let mut xadj = Vec::with_capacity(lists.len() + 1);
        let mut adjncy = Vec::new();
        xadj.push(0);
        for l in lists {
            adjncy.extend_from_slice(l);
            xadj.push(adjncy.len());
        }
        let ewgt = vec![1; adjncy.len()];
        let g = Graph { xadj, adjncy, vwgt, ewgt };
        g.validate()?;
        Ok(g)
    }

    /// Builds a simple graph from an undirected edge list; duplicates and loops are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut lists = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u != v {
                lists[u].push(v);
                lists[v].push(u);
            }
        }
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        Graph::from_adjacency(&lists)
    }

    pub fn vertex_count(&self) -> usize {
        self.xadj.len().saturating_sub(1)
    }

    /// Number of arcs (each undirected edge counted twice).
    pub fn arc_count(&self) -> usize {
        self.adjncy.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjncy.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjncy[self.xadj[v]..self.xadj[v + 1]]
    }

    #[inline]
    pub fn edge_weights(&self, v: usize) -> &[i64] {
        &self.ewgt[self.xadj[v]..self.xadj[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.xadj[v + 1] - self.xadj[v]
    }

    pub fn total_weight(&self) -> i64 {
        self.vwgt.iter().sum()
    }

    /// Checks array shapes, ranges, absence of loops and multi-edges, and symmetry.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertex_count();
        if self.xadj.first().copied().unwrap_or(0) != 0 || self.xadj.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidGraph("adjacency index array is not monotone".into()));
        }
        if self.xadj.last().copied().unwrap_or(0) != self.adjncy.len() {
            return Err(Error::InvalidGraph("adjacency index array does not match arc count".into()));
        }
        if self.vwgt.len() != n || self.ewgt.len() != self.adjncy.len() {
            return Err(Error::InvalidGraph("weight array length mismatch".into()));
        }
        if let Some(v) = self.vwgt.iter().position(|&w| w < 1) {
            return Err(Error::InvalidGraph(format!("vertex {v} has non-positive weight")));
        }
        let mut seen = vec![usize::MAX; n];
        for v in 0..n {
            for &u in self.neighbors(v) {
                if u >= n {
                    return Err(Error::InvalidGraph(format!("vertex {v} has neighbor {u} out of range")));
                }
                if u == v {
                    return Err(Error::InvalidGraph(format!("self-loop on vertex {v}")));
                }
                if seen[u] == v {
                    return Err(Error::InvalidGraph(format!("duplicate edge ({v}, {u})")));
                }
                seen[u] = v;
            }
        }
        self.check_symmetric()
    }

    fn check_symmetric(&self) -> Result<()> {
        let n = self.vertex_count();
        let mut arcs: Vec<(usize, usize, i64)> = Vec::with_capacity(self.adjncy.len());
        for v in 0..n {
            for (&u, &w) in self.neighbors(v).iter().zip(self.edge_weights(v)) {
                arcs.push((v, u, w));
            }
        }
        let mut rev: Vec<(usize, usize, i64)> = arcs.iter().map(|&(v, u, w)| (u, v, w)).collect();
        arcs.sort_unstable();
        rev.sort_unstable();
        if let Some((a, _)) = arcs.iter().zip(&rev).find(|(a, b)| a != b) {
            return Err(Error::InvalidGraph(format!(
                "adjacency is not symmetric near arc ({}, {})",
                a.0, a.1
            )));
        }
        Ok(())
    }

    /// Sorted list of undirected edges `(u, v)` with `u < v`.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(self.edge_count());
        for v in 0..self.vertex_count() {
            for &u in self.neighbors(v) {
                if v < u {
                    edges.push((v, u));
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    /// Subgraph induced by `keep`, renumbered in ascending order; returns it with the kept vertex list.
    pub fn induced(&self, keep: &[bool]) -> (Graph, Vec<usize>) {
        let mut newidx = vec![usize::MAX; self.vertex_count()];
        let kept: Vec<usize> = (0..self.vertex_count()).filter(|&v| keep[v]).collect();
        for (i, &v) in kept.iter().enumerate() {
            newidx[v] = i;
        }
        let mut g = Graph { xadj: vec![0], ..Default::default() };
        for &v in &kept {
            for (&u, &w) in self.neighbors(v).iter().zip(self.edge_weights(v)) {
                if newidx[u] != usize::MAX {
                    g.adjncy.push(newidx[u]);
                    g.ewgt.push(w);
                }
            }
            g.xadj.push(g.adjncy.len());
            g.vwgt.push(self.vwgt[v]);
        }
        (g, kept)
    }
}
