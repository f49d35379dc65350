//! Distributed graph fragments with global, local and ghost indexings.
//!
//! Each rank owns a contiguous range of global vertex indices (`proc_vrt`,
//! duplicated on every rank) together with the adjacency of its own vertices.
//! Neighbors are stored twice: by global index in `edge_loc` and by compact
//! local-or-ghost index in `edge_gst`. Ghost vertices (non-local neighbors)
//! are numbered after the local vertices, by ascending owner rank and then
//! ascending global index; no adjacency is ever stored for them.
//!
//! Internally every index is 0-based. The `base` recorded at construction only
//! affects the `*_tab` views and [`DistGraph::owner_of`].

use std::collections::BTreeMap;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::procsim::{decode_words, split_sizes, Comm, Message};

const TAG_HALO: u32 = 0x100;
const TAG_INDUCED: u32 = 0x101;
const TAG_FOLD: u32 = 0x102;
const TAG_GATHER: u32 = 0x103;

/// Per-vertex data: one slot per local vertex followed by one slot per ghost.
pub type VertexData<T> = Vec<T>;

/// Values that can travel through a halo exchange as one 64-bit word.
pub trait Word: Copy {
    fn to_word(self) -> u64;
    fn from_word(w: u64) -> Self;
}

macro_rules! impl_word {
    ($($t:ty),*) => {$(
        impl Word for $t {
            #[inline]
            fn to_word(self) -> u64 { self as u64 }
            #[inline]
            fn from_word(w: u64) -> Self { w as $t }
        }
    )*};
}
impl_word!(u8, u32, u64, usize, i32, i64);

impl Word for bool {
    fn to_word(self) -> u64 {
        self as u64
    }
    fn from_word(w: u64) -> Self {
        w != 0
    }
}

/// Which half of the group receives a folded graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldTarget {
    /// The first `ceil(p/2)` ranks.
    First,
    /// The remaining `floor(p/2)` ranks.
    Second,
    /// Both halves, each receiving a complete copy.
    Duplicate,
}

/// One rank's fragment of a distributed graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistGraph {
    base: usize,
    rank: usize,
    proc_vrt: Vec<usize>,
    arc_glb: usize,
    vert_loc: Vec<usize>,
    vend_loc: Vec<usize>,
    edge_loc: Vec<usize>,
    edge_gst: Vec<usize>,
    edge_wgt: Vec<i64>,
    velo: Vec<i64>,
    vnum: Vec<usize>,
    gst_glb: Vec<usize>,
    send_lists: Vec<(usize, Vec<usize>)>,
    recv_slots: Vec<(usize, Range<usize>)>,
}

/// Local vertex record used while assembling fragments.
#[derive(Debug, Clone)]
pub(crate) struct VertexRecord {
    pub global: usize,
    pub weight: i64,
    pub vnum: usize,
    pub adj: Vec<(usize, i64)>,
}

impl VertexRecord {
    pub(crate) fn push_words(&self, out: &mut Vec<u64>) {
        out.push(self.global as u64);
        out.push(self.weight as u64);
        out.push(self.vnum as u64);
        out.push(self.adj.len() as u64);
        for &(u, w) in &self.adj {
            out.push(u as u64);
            out.push(w as u64);
        }
    }

    pub(crate) fn read_words(words: &[u64]) -> Result<Vec<VertexRecord>> {
        let mut out = Vec::new();
        let mut i = 0;
        let bad = || Error::Invariant("truncated vertex record".into());
        while i < words.len() {
            let head = words.get(i..i + 4).ok_or_else(bad)?;
            let deg = head[3] as usize;
            let body = words.get(i + 4..i + 4 + 2 * deg).ok_or_else(bad)?;
            out.push(VertexRecord {
                global: head[0] as usize,
                weight: head[1] as i64,
                vnum: head[2] as usize,
                adj: body.chunks_exact(2).map(|c| (c[0] as usize, c[1] as i64)).collect(),
            });
            i += 4 + 2 * deg;
        }
        Ok(out)
    }
}

/// Contiguous block owners: vertex `v` goes to rank `v / ceil(n/p)`.
pub fn block_owners(n: usize, procs: usize) -> Vec<usize> {
    let block = n.div_ceil(procs).max(1);
    (0..n).map(|v| (v / block).min(procs - 1)).collect()
}

/// Range starts for `n` vertices spread over `q` ranks with counts differing by at most one.
pub fn balanced_ranges(n: usize, q: usize) -> Vec<usize> {
    let mut starts = Vec::with_capacity(q + 1);
    let mut acc = 0;
    starts.push(0);
    for i in 0..q {
        acc += n / q + usize::from(i < n % q);
        starts.push(acc);
    }
    starts
}

impl DistGraph {
    /// Distributes a centralized graph according to `owner`, returning every rank's fragment.
    ///
    /// Vertices are renumbered rank-major (stable in input order), so when `owner`
    /// is non-decreasing global indices equal input indices. The original index of
    /// each vertex is kept in [`DistGraph::vnum`].
    pub fn build(graph: &Graph, owner: &[usize], procs: usize, base: usize) -> Result<Vec<DistGraph>> {
        let (records, proc_vrt) = Self::renumber(graph, owner, procs, base)?;
        let mut out = Vec::with_capacity(procs);
        for rank in 0..procs {
            let recs = records[proc_vrt[rank]..proc_vrt[rank + 1]].to_vec();
            let mut g = DistGraph::from_records(rank, proc_vrt.clone(), recs, base)?;
            g.arc_glb = graph.arc_count();
            out.push(g);
        }
        Ok(out)
    }

    /// Same as [`DistGraph::build`] but materializes only `rank`'s fragment.
    pub fn scatter(graph: &Graph, owner: &[usize], procs: usize, rank: usize, base: usize) -> Result<DistGraph> {
        let (records, proc_vrt) = Self::renumber(graph, owner, procs, base)?;
        let recs = records[proc_vrt[rank]..proc_vrt[rank + 1]].to_vec();
        let mut g = DistGraph::from_records(rank, proc_vrt, recs, base)?;
        g.arc_glb = graph.arc_count();
        Ok(g)
    }

    fn renumber(graph: &Graph, owner: &[usize], procs: usize, base: usize) -> Result<(Vec<VertexRecord>, Vec<usize>)> {
        graph.validate()?;
        let n = graph.vertex_count();
        if owner.len() != n {
            return Err(Error::InvalidGraph(format!(
                "owner assignment covers {} of {n} vertices",
                owner.len()
            )));
        }
        if base > 1 {
            return Err(Error::InvalidGraph(format!("base must be 0 or 1, got {base}")));
        }
        if let Some(&r) = owner.iter().find(|&&r| r >= procs) {
            return Err(Error::InvalidGraph(format!("owner rank {r} outside {procs} ranks")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| owner[v]);
        let mut newidx = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            newidx[v] = i;
        }
        let mut proc_vrt = vec![0; procs + 1];
        for &r in owner {
            proc_vrt[r + 1] += 1;
        }
        for r in 0..procs {
            proc_vrt[r + 1] += proc_vrt[r];
        }
        let records = order
            .iter()
            .map(|&v| VertexRecord {
                global: newidx[v],
                weight: graph.vwgt[v],
                vnum: v,
                adj: graph
                    .neighbors(v)
                    .iter()
                    .zip(graph.edge_weights(v))
                    .map(|(&u, &w)| (newidx[u], w))
                    .collect(),
            })
            .collect();
        Ok((records, proc_vrt))
    }

    /// Assembles a fragment from its local vertex records (ascending global order).
    pub(crate) fn from_records(rank: usize, proc_vrt: Vec<usize>, recs: Vec<VertexRecord>, base: usize) -> Result<DistGraph> {
        let vbeg = proc_vrt[rank];
        let vend = proc_vrt[rank + 1];
        if recs.len() != vend - vbeg {
            return Err(Error::Invariant(format!(
                "rank {rank} got {} vertices for range {vbeg}..{vend}",
                recs.len()
            )));
        }
        let nglb = *proc_vrt.last().unwrap();
        let mut g = DistGraph {
            base,
            rank,
            proc_vrt,
            arc_glb: 0,
            vert_loc: Vec::with_capacity(recs.len()),
            vend_loc: Vec::with_capacity(recs.len()),
            edge_loc: Vec::new(),
            edge_gst: Vec::new(),
            edge_wgt: Vec::new(),
            velo: Vec::with_capacity(recs.len()),
            vnum: Vec::with_capacity(recs.len()),
            gst_glb: Vec::new(),
            send_lists: Vec::new(),
            recv_slots: Vec::new(),
        };
        let mut ghosts: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, r) in recs.into_iter().enumerate() {
            if r.global != vbeg + i {
                return Err(Error::Invariant(format!("vertex record {} out of order on rank {rank}", r.global)));
            }
            if r.weight < 1 {
                return Err(Error::InvalidGraph(format!("vertex {} has weight {}", r.global, r.weight)));
            }
            g.vert_loc.push(g.edge_loc.len());
            for (u, w) in r.adj {
                if u >= nglb {
                    return Err(Error::InvalidGraph(format!("neighbor {u} outside all ranges")));
                }
                if !(vbeg..vend).contains(&u) {
                    ghosts.insert(u, 0);
                }
                g.edge_loc.push(u);
                g.edge_wgt.push(w);
            }
            g.vend_loc.push(g.edge_loc.len());
            g.velo.push(r.weight);
            g.vnum.push(r.vnum);
        }
        let nloc = g.velo.len();
        // ascending global order == ascending (owner, global) order
        for (i, (_, slot)) in ghosts.iter_mut().enumerate() {
            *slot = nloc + i;
        }
        g.gst_glb = ghosts.keys().copied().collect();
        g.edge_gst = g
            .edge_loc
            .iter()
            .map(|&u| if (vbeg..vend).contains(&u) { u - vbeg } else { ghosts[&u] })
            .collect();

        let mut recv: Vec<(usize, Range<usize>)> = Vec::new();
        for (i, &u) in g.gst_glb.iter().enumerate() {
            let r = g.owner(u);
            match recv.last_mut() {
                Some((owner, range)) if *owner == r => range.end = nloc + i + 1,
                _ => recv.push((r, nloc + i..nloc + i + 1)),
            }
        }
        g.recv_slots = recv;
        let mut send: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..nloc {
            let mut last = usize::MAX;
            let mut ranks: Vec<usize> = g.edge_gst[g.vert_loc[v]..g.vend_loc[v]]
                .iter()
                .filter(|&&x| x >= nloc)
                .map(|&x| g.owner(g.gst_glb[x - nloc]))
                .collect();
            ranks.sort_unstable();
            for r in ranks {
                if r != last {
                    send.entry(r).or_default().push(v);
                    last = r;
                }
            }
        }
        g.send_lists = send.into_iter().collect();
        g.arc_glb = g.edge_loc.len();
        Ok(g)
    }

    /// Sets the global arc count after a collective sum.
    fn sync_arc_count(&mut self, comm: &Comm) -> Result<()> {
        let s = comm.all_reduce_sum(TAG_GATHER, &[self.edge_loc.len() as i64])?;
        self.arc_glb = s[0] as usize;
        Ok(())
    }

    /// Builds a fragment collectively and records the global arc count.
    pub(crate) fn assemble(
        comm: &Comm,
        proc_vrt: Vec<usize>,
        recs: Vec<VertexRecord>,
        base: usize,
    ) -> Result<DistGraph> {
        let mut g = DistGraph::from_records(comm.rank(), proc_vrt, recs, base)?;
        g.sync_arc_count(comm)?;
        Ok(g)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn procs(&self) -> usize {
        self.proc_vrt.len() - 1
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn local_count(&self) -> usize {
        self.velo.len()
    }

    pub fn ghost_count(&self) -> usize {
        self.gst_glb.len()
    }

    /// Global vertex count |V|.
    pub fn global_count(&self) -> usize {
        *self.proc_vrt.last().unwrap()
    }

    /// Global arc count (each edge counted once per direction).
    pub fn global_arc_count(&self) -> usize {
        self.arc_glb
    }

    pub fn global_edge_count(&self) -> usize {
        self.arc_glb / 2
    }

    pub fn local_arc_count(&self) -> usize {
        self.edge_loc.len()
    }

    /// 0-based global index of the first local vertex.
    pub fn first_global(&self) -> usize {
        self.proc_vrt[self.rank]
    }

    pub fn local_range(&self) -> Range<usize> {
        self.proc_vrt[self.rank]..self.proc_vrt[self.rank + 1]
    }

    pub fn vertex_weights(&self) -> &[i64] {
        &self.velo
    }

    /// Original (top-level) vertex index of each local vertex.
    pub fn vnum(&self) -> &[usize] {
        &self.vnum
    }

    pub fn ghost_globals(&self) -> &[usize] {
        &self.gst_glb
    }

    pub fn proc_ranges(&self) -> &[usize] {
        &self.proc_vrt
    }

    /// Local-or-ghost neighbor indices of local vertex `v`.
    #[inline]
    pub fn neighbors_gst(&self, v: usize) -> &[usize] {
        &self.edge_gst[self.vert_loc[v]..self.vend_loc[v]]
    }

    /// Global neighbor indices of local vertex `v`.
    #[inline]
    pub fn neighbors_glb(&self, v: usize) -> &[usize] {
        &self.edge_loc[self.vert_loc[v]..self.vend_loc[v]]
    }

    #[inline]
    pub fn edge_weights(&self, v: usize) -> &[i64] {
        &self.edge_wgt[self.vert_loc[v]..self.vend_loc[v]]
    }

    /// Global index of a local or ghost slot.
    #[inline]
    pub fn global_of(&self, slot: usize) -> usize {
        if slot < self.local_count() {
            self.first_global() + slot
        } else {
            self.gst_glb[slot - self.local_count()]
        }
    }

    /// Rank owning 0-based global index `g`.
    #[inline]
    pub(crate) fn owner(&self, g: usize) -> usize {
        self.proc_vrt.partition_point(|&s| s <= g) - 1
    }

    /// Rank owning the based global index `global`, by binary search on the range array.
    pub fn owner_of(&self, global: usize) -> Result<usize> {
        let n = self.global_count();
        if global < self.base || global >= self.base + n {
            return Err(Error::InvalidGraph(format!(
                "global index {global} outside [{}, {})",
                self.base,
                self.base + n
            )));
        }
        Ok(self.owner(global - self.base))
    }

    /// Based range-start array (length procs + 1).
    pub fn proc_vrt_tab(&self) -> Vec<usize> {
        self.proc_vrt.iter().map(|&s| s + self.base).collect()
    }

    /// Based adjacency start indices, one per local vertex.
    pub fn vert_loc_tab(&self) -> Vec<usize> {
        self.vert_loc.iter().map(|&s| s + self.base).collect()
    }

    /// Based adjacency after-end indices, one per local vertex.
    pub fn vend_loc_tab(&self) -> Vec<usize> {
        self.vend_loc.iter().map(|&s| s + self.base).collect()
    }

    /// Based global neighbor indices.
    pub fn edge_loc_tab(&self) -> Vec<usize> {
        self.edge_loc.iter().map(|&s| s + self.base).collect()
    }

    /// Based local-or-ghost neighbor indices.
    pub fn edge_gst_tab(&self) -> Vec<usize> {
        self.edge_gst.iter().map(|&s| s + self.base).collect()
    }

    /// Number of vertices whose adjacency list is stored on this rank.
    pub fn stored_adjacency_len(&self) -> usize {
        self.vert_loc.len()
    }

    /// Checks every rank-local structural invariant.
    pub fn check(&self) -> Result<()> {
        let nloc = self.local_count();
        let fail = |m: String| Err(Error::Invariant(m));
        if self.vert_loc.len() != nloc || self.vend_loc.len() != nloc || self.vnum.len() != nloc {
            return fail("per-vertex arrays disagree in length".into());
        }
        if self.proc_vrt.windows(2).any(|w| w[0] > w[1]) {
            return fail("range array not monotone".into());
        }
        if self.local_range().len() != nloc {
            return fail("local count differs from owned range".into());
        }
        for v in 0..nloc {
            if self.vert_loc[v] > self.vend_loc[v] {
                return fail(format!("vertex {v} has start after end"));
            }
        }
        if self.velo.iter().any(|&w| w < 1) {
            return fail("vertex weight below 1".into());
        }
        let ng = self.ghost_count();
        for (&gst, &glb) in self.edge_gst.iter().zip(&self.edge_loc) {
            if gst >= nloc + ng || self.global_of(gst) != glb {
                return fail(format!("edge_gst entry {gst} does not match global {glb}"));
            }
            if glb >= self.global_count() {
                return fail(format!("neighbor {glb} outside all ranges"));
            }
        }
        let keys: Vec<(usize, usize)> = self.gst_glb.iter().map(|&g| (self.owner(g), g)).collect();
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return fail("ghosts not ordered by (owner, global)".into());
        }
        if self.gst_glb.iter().any(|&g| self.owner(g) == self.rank) {
            return fail("ghost owned locally".into());
        }
        Ok(())
    }

    /// Fills the ghost slots of `data` with the owners' local values.
    ///
    /// Outgoing values are packed per destination by in-order traversal of the
    /// local array; incoming values land directly in the ghost slots of their
    /// owner's contiguous range.
    pub fn halo_exchange<T: Word>(&self, comm: &Comm, data: &mut [T]) -> Result<()> {
        let nloc = self.local_count();
        if data.len() != nloc + self.ghost_count() {
            return Err(Error::Invariant(format!(
                "halo data has {} slots, expected {}",
                data.len(),
                nloc + self.ghost_count()
            )));
        }
        let outgoing = self
            .send_lists
            .iter()
            .map(|(r, verts)| {
                let words: Vec<u64> = verts.iter().map(|&v| data[v].to_word()).collect();
                Message::words(*r, TAG_HALO, &words)
            })
            .collect();
        let incoming = comm.exchange(outgoing)?;
        let mut slots = self.recv_slots.iter();
        for m in incoming {
            let (owner, range) = slots
                .find(|(o, _)| *o == m.source)
                .ok_or_else(|| Error::Invariant(format!("unexpected halo message from rank {}", m.source)))?;
            let words = m.to_words();
            if words.len() != range.len() {
                return Err(Error::Invariant(format!(
                    "halo from rank {owner} carries {} values for {} ghosts",
                    words.len(),
                    range.len()
                )));
            }
            for (slot, w) in data[range.clone()].iter_mut().zip(words) {
                *slot = T::from_word(w);
            }
        }
        Ok(())
    }

    /// Convenience wrapper: extends local values with ghost slots and exchanges.
    pub fn halo_extend<T: Word + Default>(&self, comm: &Comm, local: &[T]) -> Result<VertexData<T>> {
        if local.len() != self.local_count() {
            return Err(Error::Invariant("local data length mismatch".into()));
        }
        let mut data = local.to_vec();
        data.resize(self.local_count() + self.ghost_count(), T::default());
        self.halo_exchange(comm, &mut data)?;
        Ok(data)
    }

    /// Builds the subgraph induced by the flagged local vertices.
    ///
    /// New global indices are assigned rank-major in ascending old global order,
    /// and every rank keeps its own flagged vertices. Returns the subgraph and the
    /// new global index of every local vertex (`None` when not flagged).
    pub fn induced_subgraph(&self, comm: &Comm, flags: &[bool]) -> Result<(DistGraph, Vec<Option<usize>>)> {
        if flags.len() < self.local_count() {
            return Err(Error::Invariant("flag array shorter than local vertex count".into()));
        }
        let nloc = self.local_count();
        let kept = flags[..nloc].iter().filter(|&&f| f).count();
        let counts = comm.all_gather_words(TAG_INDUCED, &[kept as u64])?;
        let mut proc_vrt = vec![0usize];
        for c in &counts {
            proc_vrt.push(proc_vrt.last().unwrap() + c[0] as usize);
        }
        let start = proc_vrt[comm.rank()];
        let mut newidx = vec![u64::MAX; nloc + self.ghost_count()];
        let mut next = start;
        for v in 0..nloc {
            if flags[v] {
                newidx[v] = next as u64;
                next += 1;
            }
        }
        self.halo_exchange(comm, &mut newidx)?;
        let mut recs = Vec::with_capacity(kept);
        for v in (0..nloc).filter(|&v| flags[v]) {
            let adj = self
                .neighbors_gst(v)
                .iter()
                .zip(self.edge_weights(v))
                .filter(|(&u, _)| newidx[u] != u64::MAX)
                .map(|(&u, &w)| (newidx[u] as usize, w))
                .collect();
            recs.push(VertexRecord { global: newidx[v] as usize, weight: self.velo[v], vnum: self.vnum[v], adj });
        }
        let sub = DistGraph::assemble(comm, proc_vrt, recs, self.base)?;
        let map = (0..nloc).map(|v| (newidx[v] != u64::MAX).then_some(newidx[v] as usize)).collect();
        Ok((sub, map))
    }

    /// Redistributes the graph onto one or both halves of the group.
    ///
    /// Global indices are preserved: receivers get balanced contiguous ranges and
    /// vertices stream to them in ascending global order. Returns the fragment
    /// this rank holds in its half, or `None` if its half receives nothing.
    pub fn fold(&self, comm: &Comm, target: FoldTarget) -> Result<Option<DistGraph>> {
        let p = comm.size();
        if p < 2 {
            return Err(Error::GroupTooSmall(p));
        }
        let (first, second) = split_sizes(p);
        let n = self.global_count();
        let halves: Vec<(usize, Vec<usize>)> = match target {
            FoldTarget::First => vec![(0, balanced_ranges(n, first))],
            FoldTarget::Second => vec![(first, balanced_ranges(n, second))],
            FoldTarget::Duplicate => vec![(0, balanced_ranges(n, first)), (first, balanced_ranges(n, second))],
        };
        let mut buffers: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for v in 0..self.local_count() {
            let rec = self.record(v);
            for (offset, ranges) in &halves {
                let dest = offset + ranges.partition_point(|&s| s <= rec.global) - 1;
                rec.push_words(buffers.entry(dest).or_default());
            }
        }
        let outgoing = buffers
            .into_iter()
            .map(|(d, w)| Message::words(d, TAG_FOLD, &w))
            .collect();
        let incoming = comm.exchange(outgoing)?;
        let mine = halves.iter().find(|(offset, ranges)| {
            let q = ranges.len() - 1;
            (*offset..offset + q).contains(&comm.rank())
        });
        let Some((offset, ranges)) = mine else {
            return Ok(None);
        };
        let mut recs = Vec::new();
        for m in incoming {
            recs.extend(VertexRecord::read_words(&decode_words(&m.payload))?);
        }
        recs.sort_by_key(|r| r.global);
        let mut g = DistGraph::from_records(comm.rank() - offset, ranges.clone(), recs, self.base)?;
        g.arc_glb = self.arc_glb;
        Ok(Some(g))
    }

    pub(crate) fn record(&self, v: usize) -> VertexRecord {
        VertexRecord {
            global: self.first_global() + v,
            weight: self.velo[v],
            vnum: self.vnum[v],
            adj: self
                .neighbors_glb(v)
                .iter()
                .copied()
                .zip(self.edge_weights(v).iter().copied())
                .collect(),
        }
    }

    /// Centralized copy of a single-rank graph.
    pub fn to_graph(&self) -> Graph {
        assert_eq!(self.procs(), 1, "to_graph needs a fragment covering the whole graph");
        let mut xadj = Vec::with_capacity(self.local_count() + 1);
        xadj.push(0);
        let mut adjncy = Vec::with_capacity(self.edge_loc.len());
        let mut ewgt = Vec::with_capacity(self.edge_loc.len());
        for v in 0..self.local_count() {
            adjncy.extend_from_slice(self.neighbors_glb(v));
            ewgt.extend_from_slice(self.edge_weights(v));
            xadj.push(adjncy.len());
        }
        Graph { xadj, adjncy, vwgt: self.velo.clone(), ewgt }
    }

    /// Wraps a centralized graph as a single-rank fragment.
    pub fn from_graph(graph: &Graph, vnum: Vec<usize>, base: usize) -> Result<DistGraph> {
        let n = graph.vertex_count();
        let recs = (0..n)
            .map(|v| VertexRecord {
                global: v,
                weight: graph.vwgt[v],
                vnum: vnum[v],
                adj: graph
                    .neighbors(v)
                    .iter()
                    .copied()
                    .zip(graph.edge_weights(v).iter().copied())
                    .collect(),
            })
            .collect();
        DistGraph::from_records(0, vec![0, n], recs, base)
    }

    /// Collects the whole graph on every rank, with the original index of each vertex.
    pub fn gather(&self, comm: &Comm) -> Result<(Graph, Vec<usize>)> {
        let mut words = Vec::new();
        for v in 0..self.local_count() {
            self.record(v).push_words(&mut words);
        }
        let parts = comm.all_gather_words(TAG_GATHER, &words)?;
        let mut recs = Vec::with_capacity(self.global_count());
        for p in parts {
            recs.extend(VertexRecord::read_words(&p)?);
        }
        let mut g = Graph { xadj: vec![0], ..Default::default() };
        let mut vnum = Vec::with_capacity(recs.len());
        for r in recs {
            for (u, w) in r.adj {
                g.adjncy.push(u);
                g.ewgt.push(w);
            }
            g.xadj.push(g.adjncy.len());
            g.vwgt.push(r.weight);
            vnum.push(r.vnum);
        }
        Ok((g, vnum))
    }
}
