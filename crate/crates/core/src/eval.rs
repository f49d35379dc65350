//! Symbolic Cholesky statistics of an ordering.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::order::InvPerm;

/// Factor statistics: per-column nonzero counts (diagonal included) in
/// elimination order, their sum, and the operation count sum of squares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElimStats {
    pub counts: Vec<usize>,
    pub nnz: u64,
    pub opc: u64,
    /// |E| + |V| of the input graph.
    pub base_nnz: u64,
}

impl ElimStats {
    fn from_counts(graph: &Graph, counts: Vec<usize>) -> ElimStats {
        let nnz = counts.iter().map(|&c| c as u64).sum();
        let opc = counts.iter().map(|&c| (c as u64) * (c as u64)).sum();
        let base_nnz = (graph.edge_count() + graph.vertex_count()) as u64;
        ElimStats { counts, nnz, opc, base_nnz }
    }

    /// NNZ relative to the lower triangle of the input matrix.
    pub fn fill_ratio(&self) -> f64 {
        if self.base_nnz == 0 {
            return 1.0;
        }
        self.nnz as f64 / self.base_nnz as f64
    }

    /// The one-line metrics summary.
    pub fn metrics_line(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ElimStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NNZ={} OPC={} FILL={:.4}", self.nnz, self.opc, self.fill_ratio())
    }
}

fn check_sizes(graph: &Graph, iperm: &InvPerm) -> Result<()> {
    if iperm.len() != graph.vertex_count() {
        return Err(Error::InvalidPermutation(format!(
            "permutation has {} entries for {} vertices",
            iperm.len(),
            graph.vertex_count()
        )));
    }
    Ok(())
}

/// Reference statistics by explicit vertex elimination with clique fill.
pub fn elimination_stats(graph: &Graph, iperm: &InvPerm) -> Result<ElimStats> {
    check_sizes(graph, iperm)?;
    let n = graph.vertex_count();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| graph.neighbors(v).iter().copied().collect()).collect();
    let mut counts = Vec::with_capacity(n);
    for &v in iperm.as_slice() {
        let nbrs: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        counts.push(nbrs.len() + 1);
        for &a in &nbrs {
            adj[a].remove(&v);
            for &b in &nbrs {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    Ok(ElimStats::from_counts(graph, counts))
}

/// Statistics from the elimination tree: each column's structure is the union
/// of its own lower entries and its children's structures.
pub fn symbolic_factor(graph: &Graph, iperm: &InvPerm) -> Result<ElimStats> {
    check_sizes(graph, iperm)?;
    let n = graph.vertex_count();
    let perm = iperm.invert();
    let parent = etree(graph, iperm, &perm);
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        if let Some(p) = parent[j] {
            children[p].push(j);
        }
    }
    let mut structs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = Vec::with_capacity(n);
    let mut mark = vec![usize::MAX; n];
    for j in 0..n {
        let mut s: Vec<usize> = Vec::new();
        mark[j] = j;
        for &u in graph.neighbors(iperm.as_slice()[j]) {
            let i = perm[u];
            if i > j && mark[i] != j {
                mark[i] = j;
                s.push(i);
            }
        }
        for &c in &children[j] {
            for i in std::mem::take(&mut structs[c]) {
                if mark[i] != j {
                    mark[i] = j;
                    s.push(i);
                }
            }
        }
        counts.push(s.len() + 1);
        structs[j] = s;
    }
    Ok(ElimStats::from_counts(graph, counts))
}

/// Elimination tree in permuted indices, with path compression.
fn etree(graph: &Graph, iperm: &InvPerm, perm: &[usize]) -> Vec<Option<usize>> {
    let n = graph.vertex_count();
    let mut parent = vec![None; n];
    let mut ancestor: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        for &u in graph.neighbors(iperm.as_slice()[j]) {
            let mut i = perm[u];
            if i >= j {
                continue;
            }
            while let Some(a) = ancestor[i] {
                if a == j {
                    break;
                }
                ancestor[i] = Some(j);
                i = a;
            }
            if ancestor[i].is_none() {
                ancestor[i] = Some(j);
                parent[i] = Some(j);
            }
        }
    }
    parent
}
