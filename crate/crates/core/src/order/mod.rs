//! Nested dissection ordering and the separator tree it produces.

mod mindeg;

pub use mindeg::{min_degree_order, min_degree_order_halo};

use std::collections::BTreeSet;

use crate::dist_graph::{DistGraph, FoldTarget};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::params::Params;
use crate::procsim::Comm;
use crate::separate::{compute_separator, SEP};

const TAG_ND_COUNT: u32 = 0x500;
const TAG_ND_SEP: u32 = 0x501;

/// Separator tree fragment. Every node covers the interval `[start, start + size)`
/// of the inverse permutation; vertex lists hold original vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderNode {
    /// A subgraph ordered sequentially; `perm[k]` is placed at `start + k`.
    Leaf { start: usize, perm: Vec<usize> },
    /// Separator vertices placed at `start..`, in ascending original index.
    Separator { start: usize, verts: Vec<usize> },
    /// A dissection step. Children held by other ranks, or empty, are `None`.
    Dissection {
        start: usize,
        size: usize,
        part0: Option<Box<OrderNode>>,
        part1: Option<Box<OrderNode>>,
        sep: Option<Box<OrderNode>>,
    },
}

impl OrderNode {
    pub fn start(&self) -> usize {
        match self {
            OrderNode::Leaf { start, .. } | OrderNode::Separator { start, .. } | OrderNode::Dissection { start, .. } => {
                *start
            }
        }
    }

    /// Number of indices covered.
    pub fn size(&self) -> usize {
        match self {
            OrderNode::Leaf { perm, .. } => perm.len(),
            OrderNode::Separator { verts, .. } => verts.len(),
            OrderNode::Dissection { size, .. } => *size,
        }
    }

    /// Leaf and separator fragments as `(start, vertices)`, in tree order.
    pub fn fragments(&self) -> Vec<(usize, &[usize])> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<(usize, &'a [usize])>) {
        match self {
            OrderNode::Leaf { start, perm } => out.push((*start, perm)),
            OrderNode::Separator { start, verts } => out.push((*start, verts)),
            OrderNode::Dissection { part0, part1, sep, .. } => {
                for c in [part0, part1, sep].into_iter().flatten() {
                    c.collect(out);
                }
            }
        }
    }

    /// Combines two fragments of the same tree held by different ranks.
    pub fn merge(self, other: OrderNode) -> Result<OrderNode> {
        match (self, other) {
            (
                OrderNode::Dissection { start, size, part0, part1, sep },
                OrderNode::Dissection { start: s2, size: z2, part0: a, part1: b, sep: c },
            ) if start == s2 && size == z2 => Ok(OrderNode::Dissection {
                start,
                size,
                part0: merge_opt(part0, a)?,
                part1: merge_opt(part1, b)?,
                sep: merge_opt(sep, c)?,
            }),
            (a, b) => Err(Error::Invariant(format!(
                "cannot merge tree fragments at {} and {}",
                a.start(),
                b.start()
            ))),
        }
    }

    /// Checks interval nesting and that separators come after both parts.
    pub fn check(&self) -> Result<()> {
        self.check_within(self.start(), self.start() + self.size())
    }

    fn check_within(&self, lo: usize, hi: usize) -> Result<()> {
        let (start, size) = (self.start(), self.size());
        if start < lo || start + size > hi {
            return Err(Error::Invariant(format!("node [{start}, {}) escapes [{lo}, {hi})", start + size)));
        }
        if let OrderNode::Dissection { part0, part1, sep, .. } = self {
            let end = start + size;
            let mut parts_end = start;
            for c in [part0, part1].into_iter().flatten() {
                c.check_within(start, end)?;
                parts_end = parts_end.max(c.start() + c.size());
            }
            if let Some(s) = sep {
                s.check_within(start, end)?;
                if !matches!(**s, OrderNode::Separator { .. }) {
                    return Err(Error::Invariant("separator child is not a separator node".into()));
                }
                if s.start() < parts_end || s.start() + s.size() != end {
                    return Err(Error::Invariant(format!("separator at {} is not last in [{start}, {end})", s.start())));
                }
            }
        }
        Ok(())
    }
}

fn merge_opt(a: Option<Box<OrderNode>>, b: Option<Box<OrderNode>>) -> Result<Option<Box<OrderNode>>> {
    Ok(match (a, b) {
        (Some(a), Some(b)) => Some(Box::new(a.merge(*b)?)),
        (a, b) => a.or(b),
    })
}

/// Merges the per-rank fragments of one ordering.
pub fn merge_fragments(fragments: Vec<Option<OrderNode>>) -> Result<Option<OrderNode>> {
    let mut acc: Option<OrderNode> = None;
    for f in fragments.into_iter().flatten() {
        acc = Some(match acc {
            None => f,
            Some(a) => a.merge(f)?,
        });
    }
    Ok(acc)
}

/// Inverse permutation: `iperm[k]` is the vertex eliminated `k`-th.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvPerm(Vec<usize>);

impl InvPerm {
    /// Validates that `order` is a permutation of `0..order.len()`.
    pub fn new(order: Vec<usize>) -> Result<InvPerm> {
        let n = order.len();
        let mut seen = vec![false; n];
        for (k, &v) in order.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidPermutation(format!("entry {k} is {v}, out of range 0..{n}")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutation(format!("vertex {v} appears twice")));
            }
        }
        Ok(InvPerm(order))
    }

    pub fn identity(n: usize) -> InvPerm {
        InvPerm((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Direct permutation: `perm[v]` is the position of vertex `v`.
    pub fn invert(&self) -> Vec<usize> {
        let mut perm = vec![0; self.0.len()];
        for (k, &v) in self.0.iter().enumerate() {
            perm[v] = k;
        }
        perm
    }
}

/// Assembles the fragments of a tree into an inverse permutation of `n` vertices.
pub fn assemble(tree: &OrderNode, n: usize) -> Result<InvPerm> {
    tree.check()?;
    let mut frags = tree.fragments();
    frags.sort_by_key(|f| f.0);
    let mut order = Vec::with_capacity(n);
    for (start, verts) in frags {
        if start != order.len() {
            return Err(Error::InvalidPermutation(format!(
                "fragment at {start} does not continue the ordering at {}",
                order.len()
            )));
        }
        order.extend_from_slice(verts);
    }
    if order.len() != n {
        return Err(Error::InvalidPermutation(format!("ordering covers {} of {n} vertices", order.len())));
    }
    InvPerm::new(order)
}

/// Orders a centralized graph; `labels` are the original vertex indices.
pub fn sequential_nd(comm: &Comm, graph: &Graph, labels: &[usize], start: usize, params: &Params) -> Result<OrderNode> {
    sequential_nd_halo(comm, graph, labels, &vec![false; graph.vertex_count()], start, params)
}

/// Orders the non-halo vertices of a centralized graph. Halo vertices are
/// neighbors that are ordered later; they only inform minimum degree.
pub fn sequential_nd_halo(
    comm: &Comm,
    graph: &Graph,
    labels: &[usize],
    halo: &[bool],
    start: usize,
    params: &Params,
) -> Result<OrderNode> {
    let n = halo.iter().filter(|&&h| !h).count();
    let md_leaf = || {
        let perm = min_degree_order_halo(graph, labels, halo).into_iter().map(|v| labels[v]).collect();
        Ok(OrderNode::Leaf { start, perm })
    };
    if n <= params.nd_cutoff.max(1) {
        return md_leaf();
    }
    let core_flags: Vec<bool> = halo.iter().map(|&h| !h).collect();
    let (core, core_of) = graph.induced(&core_flags);
    let core_labels: Vec<usize> = core_of.iter().map(|&v| labels[v]).collect();
    let dg = DistGraph::from_graph(&core, core_labels, 0)?;
    let core_parts = compute_separator(comm, &dg, params)?;
    // halo vertices keep a label no part owns
    let mut parts = vec![u8::MAX; graph.vertex_count()];
    for (i, &v) in core_of.iter().enumerate() {
        parts[v] = core_parts[i];
    }
    let count = |l: u8| parts.iter().filter(|&&p| p == l).count();
    let (n0, n1) = (count(0), count(1));
    if n0 == n || n1 == n || (n0 == 0 && n1 == 0) {
        return md_leaf();
    }
    let child = |l: u8, at: usize| -> Result<Option<Box<OrderNode>>> {
        if count(l) == 0 {
            return Ok(None);
        }
        // the part plus its bordering separator and halo vertices
        let keep: Vec<bool> = (0..graph.vertex_count())
            .map(|v| parts[v] == l || (parts[v] != 1 - l && graph.neighbors(v).iter().any(|&u| parts[u] == l)))
            .collect();
        let (sub, kept) = graph.induced(&keep);
        let sub_labels: Vec<usize> = kept.iter().map(|&v| labels[v]).collect();
        let sub_halo: Vec<bool> = kept.iter().map(|&v| parts[v] != l).collect();
        Ok(Some(Box::new(sequential_nd_halo(comm, &sub, &sub_labels, &sub_halo, at, params)?)))
    };
    let part0 = child(0, start)?;
    let part1 = child(1, start + n0)?;
    let mut verts: Vec<usize> = (0..graph.vertex_count()).filter(|&v| parts[v] == SEP).map(|v| labels[v]).collect();
    verts.sort_unstable();
    let sep = (!verts.is_empty()).then(|| Box::new(OrderNode::Separator { start: start + n0 + n1, verts }));
    Ok(OrderNode::Dissection { start, size: n, part0, part1, sep })
}

/// Nested dissection of a distributed graph over the group of `comm`.
///
/// Returns this rank's fragment of the separator tree, or `None` if it holds
/// no part of it. Merging all ranks' fragments gives the full tree.
pub fn nested_dissection(comm: &Comm, graph: DistGraph, start: usize, params: &Params) -> Result<Option<OrderNode>> {
    let halo = vec![false; graph.local_count()];
    nested_dissection_halo(comm, graph, halo, start, params)
}

/// Original indices of the flagged local vertices of all ranks.
fn gather_vnums(comm: &Comm, graph: &DistGraph, flags: &[bool]) -> Result<BTreeSet<usize>> {
    let local: Vec<u64> = (0..graph.local_count()).filter(|&v| flags[v]).map(|v| graph.vnum()[v] as u64).collect();
    let all = comm.all_gather_words(TAG_ND_SEP, &local)?;
    Ok(all.into_iter().flatten().map(|v| v as usize).collect())
}

/// As [`nested_dissection`]; local vertices flagged in `halo` belong to
/// separators ordered later and are only kept for minimum degree.
fn nested_dissection_halo(
    comm: &Comm,
    graph: DistGraph,
    halo: Vec<bool>,
    start: usize,
    params: &Params,
) -> Result<Option<OrderNode>> {
    let nloc = graph.local_count();
    let real = halo.iter().filter(|&&h| !h).count() as i64;
    let n = comm.all_reduce_sum(TAG_ND_COUNT, &[real])?[0] as usize;
    if n == 0 {
        return Ok(None);
    }
    if comm.size() == 1 {
        return sequential_nd_halo(comm, &graph.to_graph(), graph.vnum(), &halo, start, params).map(Some);
    }
    if n <= params.nd_cutoff {
        let halo_set = gather_vnums(comm, &graph, &halo)?;
        let (g, vnum) = graph.gather(comm)?;
        if comm.rank() != 0 {
            return Ok(None);
        }
        let mut seq = comm.split()?.1;
        while seq.size() > 1 {
            seq = seq.split()?.1;
        }
        let h: Vec<bool> = vnum.iter().map(|v| halo_set.contains(v)).collect();
        return sequential_nd_halo(&seq, &g, &vnum, &h, start, params).map(Some);
    }
    // separate the non-halo core; halo vertices get a label no part owns
    let parts: Vec<u8> = if n < graph.global_count() {
        let core_flags: Vec<bool> = halo.iter().map(|&h| !h).collect();
        let (core, map) = graph.induced_subgraph(comm, &core_flags)?;
        let core_parts = compute_separator(comm, &core, params)?;
        let first = core.first_global();
        (0..nloc).map(|v| map[v].map_or(u8::MAX, |c| core_parts[c - first])).collect()
    } else {
        compute_separator(comm, &graph, params)?
    };
    let count = |l: u8| parts.iter().filter(|&&p| p == l).count() as i64;
    let totals = comm.all_reduce_sum(TAG_ND_COUNT, &[count(0), count(1)])?;
    let (n0, n1) = (totals[0] as usize, totals[1] as usize);
    let labels = graph.halo_extend(comm, &parts)?;
    // each part keeps the separator and halo vertices bordering it
    let flags = |l: u8| -> Vec<bool> {
        (0..nloc)
            .map(|v| parts[v] == l || (parts[v] != 1 - l && graph.neighbors_gst(v).iter().any(|&u| labels[u] == l)))
            .collect()
    };
    let (f0, f1) = (flags(0), flags(1));
    let border = |f: &[bool], l: u8| -> Vec<bool> { (0..nloc).map(|v| f[v] && parts[v] != l).collect() };
    let halo0 = gather_vnums(comm, &graph, &border(&f0, 0))?;
    let halo1 = gather_vnums(comm, &graph, &border(&f1, 1))?;
    let (g0, _) = graph.induced_subgraph(comm, &f0)?;
    let (g1, _) = graph.induced_subgraph(comm, &f1)?;
    let h0 = g0.fold(comm, FoldTarget::First)?;
    let h1 = g1.fold(comm, FoldTarget::Second)?;
    let seps: Vec<bool> = parts.iter().map(|&p| p == SEP).collect();
    let sep_all = gather_vnums(comm, &graph, &seps)?;
    let (side, sub) = comm.split()?;
    let mine = if side == 0 { h0 } else { h1 }
        .ok_or_else(|| Error::Invariant("folded subgraph missing on receiving half".into()))?;
    let halo_set = if side == 0 { &halo0 } else { &halo1 };
    let sub_halo: Vec<bool> = mine.vnum().iter().map(|v| halo_set.contains(v)).collect();
    let at = if side == 0 { start } else { start + n0 };
    let child = nested_dissection_halo(&sub, mine, sub_halo, at, params)?.map(Box::new);
    let sep = if comm.rank() == 0 && !sep_all.is_empty() {
        let verts: Vec<usize> = sep_all.into_iter().collect();
        Some(Box::new(OrderNode::Separator { start: start + n0 + n1, verts }))
    } else {
        None
    };
    let (part0, part1) = if side == 0 { (child, None) } else { (None, child) };
    Ok(Some(OrderNode::Dissection { start, size: n, part0, part1, sep }))
}
