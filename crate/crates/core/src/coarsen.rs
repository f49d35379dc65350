//! Multilevel coarsening of distributed graphs.
//!
//! Matching is synchronous and probabilistic. Each rank walks a shuffled queue
//! of its unmatched vertices and picks a mate at random among the available
//! neighbors joined by the heaviest edges. Local mates are recorded at once;
//! remote mates become requests, and both ends stay locked until the request
//! and reply supersteps settle them. Refused vertices are re-queued for the
//! next pass.
//!
//! Coarsening continues with fold-dup whenever the average number of vertices
//! per rank drops below `fold_min`: the graph is duplicated onto both halves of
//! the group, which then coarsen independently. Once a group is down to a
//! single rank, coarsening goes on sequentially until the graph is small enough
//! or stops shrinking.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dist_graph::{DistGraph, FoldTarget, VertexRecord};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::procsim::{Comm, Message};

const TAG_MATCH_REQ: u32 = 0x200;
const TAG_MATCH_REPLY: u32 = 0x201;
const TAG_MATCH_COUNT: u32 = 0x202;
const TAG_COARSE_COUNT: u32 = 0x203;
const TAG_COARSE_ADJ: u32 = 0x204;

const AVAILABLE: u64 = u64::MAX;
const FINAL: u64 = u64::MAX - 1;

/// Result of one matching round on a rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Partner global index of every local vertex, `None` if left unmatched.
    pub mate: Vec<Option<usize>>,
    /// Request/reply passes performed.
    pub passes: usize,
}

impl Matching {
    /// The empty matching: every vertex stays alone.
    pub fn empty(graph: &DistGraph) -> Matching {
        Matching { mate: vec![None; graph.local_count()], passes: 0 }
    }

    pub fn pair_count_local(&self) -> usize {
        self.mate.iter().filter(|m| m.is_some()).count()
    }
}

/// What happened to the fine graph at a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldAction {
    /// Matched and collapsed on the same ranks.
    None,
    /// Duplicated onto both halves of the group, unchanged.
    FoldDup,
}

/// One step of the hierarchy: the fine graph and how it maps to the next one.
#[derive(Debug, Clone)]
pub struct CoarseningLevel {
    pub fine: DistGraph,
    pub comm: Comm,
    pub action: FoldAction,
    /// Coarse global index of every local and ghost slot (empty for fold-dup,
    /// where global indices are unchanged).
    pub fine_to_coarse: Vec<usize>,
}

/// Levels finest to coarsest plus the centralized coarsest graph of this rank.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub levels: Vec<CoarseningLevel>,
    pub coarsest: DistGraph,
    pub coarsest_comm: Comm,
}

impl Hierarchy {
    /// Total number of vertices stored on this rank over all levels.
    pub fn stored_vertices(&self) -> usize {
        self.levels.iter().map(|l| l.fine.local_count()).sum::<usize>() + self.coarsest.local_count()
    }

    pub fn fold_actions(&self) -> Vec<FoldAction> {
        self.levels.iter().map(|l| l.action).collect()
    }
}

/// Computes a heavy-edge matching collectively.
pub fn match_graph(comm: &Comm, graph: &DistGraph, params: &Params) -> Result<Matching> {
    let mut rng = comm.rng();
    let mut queue: Vec<usize> = (0..graph.local_count()).collect();
    queue.shuffle(&mut rng);
    match_with_queue(comm, graph, params, queue, &mut rng)
}

pub(crate) fn match_with_queue<R: Rng>(
    comm: &Comm,
    graph: &DistGraph,
    params: &Params,
    mut queue: Vec<usize>,
    rng: &mut R,
) -> Result<Matching> {
    let nloc = graph.local_count();
    let nslots = nloc + graph.ghost_count();
    let first = graph.first_global();
    let nglb = graph.global_count();
    let mut mate = vec![AVAILABLE; nslots];
    let mut passes = 0;
    let mut candidates = Vec::new();

    while passes < params.match_passes.max(1) {
        passes += 1;
        let mut locked = vec![false; nslots];
        let mut asked = vec![usize::MAX; nloc];
        let mut next_queue = Vec::new();
        let mut requests: BTreeMap<usize, Vec<u64>> = BTreeMap::new();

        for &v in &queue {
            if mate[v] != AVAILABLE {
                continue;
            }
            let mut best = i64::MIN;
            let mut waiting = false;
            candidates.clear();
            for (&u, &w) in graph.neighbors_gst(v).iter().zip(graph.edge_weights(v)) {
                if mate[u] != AVAILABLE {
                    continue;
                }
                if locked[u] {
                    waiting = true;
                    continue;
                }
                if w > best {
                    best = w;
                    candidates.clear();
                }
                if w == best {
                    candidates.push(u);
                }
            }
            if candidates.is_empty() {
                if waiting {
                    next_queue.push(v);
                } else {
                    mate[v] = FINAL;
                }
                continue;
            }
            let u = candidates[rng.gen_range(0..candidates.len())];
            if u < nloc {
                mate[v] = (first + u) as u64;
                mate[u] = (first + v) as u64;
            } else {
                locked[v] = true;
                locked[u] = true;
                let target = graph.global_of(u);
                asked[v] = target;
                requests
                    .entry(graph.owner(target))
                    .or_default()
                    .extend([(first + v) as u64, target as u64]);
            }
        }

        // request superstep
        let outgoing = requests
            .iter()
            .map(|(&r, w)| Message::words(r, TAG_MATCH_REQ, w))
            .collect();
        let incoming = comm.exchange(outgoing)?;
        let mut by_target: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for m in &incoming {
            for pair in m.to_words().chunks_exact(2) {
                let target = pair[1] as usize;
                if !graph.local_range().contains(&target) {
                    return Err(Error::Invariant(format!("match request for non-local vertex {target}")));
                }
                by_target.entry(target - first).or_default().push((pair[0] as usize, m.source));
            }
        }
        let mut replies: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for (t, mut reqs) in by_target {
            reqs.sort_unstable();
            let winner = if mate[t] != AVAILABLE {
                None
            } else if locked[t] {
                // t has its own request out: only a mutual request can succeed
                reqs.iter().map(|&(r, _)| r).find(|&r| r == asked[t])
            } else {
                reqs.first().map(|&(r, _)| r)
            };
            if let Some(r) = winner {
                mate[t] = r as u64;
            }
            for (r, src) in reqs {
                let granted = Some(r) == winner;
                replies
                    .entry(src)
                    .or_default()
                    .extend([r as u64, (first + t) as u64, granted as u64]);
            }
        }

        // reply superstep
        let outgoing = replies
            .iter()
            .map(|(&r, w)| Message::words(r, TAG_MATCH_REPLY, w))
            .collect();
        let incoming = comm.exchange(outgoing)?;
        for m in &incoming {
            for rep in m.to_words().chunks_exact(3) {
                let v = rep[0] as usize - first;
                let target = rep[1];
                if rep[2] != 0 {
                    if mate[v] != AVAILABLE && mate[v] != target {
                        return Err(Error::Invariant(format!(
                            "vertex {} granted to {target} but already mated",
                            first + v
                        )));
                    }
                    mate[v] = target;
                } else if mate[v] == AVAILABLE {
                    next_queue.push(v);
                }
            }
        }

        graph.halo_exchange(comm, &mut mate)?;
        queue = next_queue;
        let left = comm.all_reduce_sum(TAG_MATCH_COUNT, &[queue.len() as i64])?[0] as f64;
        if left <= params.match_stop_fraction * nglb as f64 {
            break;
        }
    }

    let mate = mate[..nloc]
        .iter()
        .map(|&m| if m == AVAILABLE || m == FINAL { None } else { Some(m as usize) })
        .collect();
    Ok(Matching { mate, passes })
}

/// Checks symmetry and adjacency of a matching collectively.
pub fn check_matching(comm: &Comm, graph: &DistGraph, matching: &Matching) -> Result<()> {
    let nloc = graph.local_count();
    let mut words: Vec<u64> = matching.mate.iter().map(|m| m.map_or(AVAILABLE, |g| g as u64)).collect();
    words.resize(nloc + graph.ghost_count(), AVAILABLE);
    graph.halo_exchange(comm, &mut words)?;
    for v in 0..nloc {
        let Some(u) = matching.mate[v] else { continue };
        let gv = graph.first_global() + v;
        let pos = graph.neighbors_glb(v).iter().position(|&x| x == u).ok_or_else(|| {
            Error::Invariant(format!("vertex {gv} matched to non-neighbor {u}"))
        })?;
        let slot = graph.neighbors_gst(v)[pos];
        if words[slot] != gv as u64 {
            return Err(Error::Invariant(format!("matching not symmetric between {gv} and {u}")));
        }
    }
    Ok(())
}

/// Collapses matched pairs into coarse vertices.
///
/// A pair's coarse vertex lives on the rank owning its lower global index;
/// coarse indices are assigned rank-major in ascending order of that index.
/// Parallel edges are merged with summed weights and self-loops dropped.
pub fn coarse_build(comm: &Comm, graph: &DistGraph, matching: &Matching) -> Result<(DistGraph, Vec<usize>)> {
    let nloc = graph.local_count();
    let nslots = nloc + graph.ghost_count();
    let first = graph.first_global();
    if matching.mate.len() != nloc {
        return Err(Error::Invariant("matching length differs from local vertex count".into()));
    }
    check_matching(comm, graph, matching)?;

    let leader = |v: usize| matching.mate[v].is_none_or(|m| m > first + v);
    let leaders = (0..nloc).filter(|&v| leader(v)).count();
    let counts = comm.all_gather_words(TAG_COARSE_COUNT, &[leaders as u64])?;
    let mut proc_vrt = vec![0usize];
    for c in &counts {
        proc_vrt.push(proc_vrt.last().unwrap() + c[0] as usize);
    }
    let cfirst = proc_vrt[comm.rank()];

    let unset = u64::MAX;
    let mut cmap = vec![unset; nslots];
    let mut next = cfirst as u64;
    // remote-mated followers, with the slot of their mate
    let mut followers = Vec::new();
    for v in 0..nloc {
        if leader(v) {
            cmap[v] = next;
            next += 1;
        } else {
            let m = matching.mate[v].unwrap();
            if graph.local_range().contains(&m) {
                cmap[v] = cmap[m - first];
            } else {
                let pos = graph.neighbors_glb(v).iter().position(|&x| x == m).unwrap();
                followers.push((v, graph.neighbors_gst(v)[pos]));
            }
        }
    }
    graph.halo_exchange(comm, &mut cmap)?;
    for &(v, slot) in &followers {
        cmap[v] = cmap[slot];
    }
    graph.halo_exchange(comm, &mut cmap)?;
    if cmap.contains(&unset) {
        return Err(Error::Invariant("fine vertex left without coarse image".into()));
    }

    let coarse_adj = |v: usize| -> Vec<(usize, i64)> {
        graph
            .neighbors_gst(v)
            .iter()
            .zip(graph.edge_weights(v))
            .map(|(&u, &w)| (cmap[u] as usize, w))
            .collect()
    };
    let mut merged: Vec<(i64, BTreeMap<usize, i64>)> = vec![(0, BTreeMap::new()); leaders];
    let mut absorb = |c: usize, weight: i64, adj: Vec<(usize, i64)>| {
        let entry = &mut merged[c - cfirst];
        entry.0 += weight;
        for (u, w) in adj {
            if u != c {
                *entry.1.entry(u).or_insert(0) += w;
            }
        }
    };
    let mut outgoing: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for v in 0..nloc {
        let c = cmap[v] as usize;
        if (cfirst..cfirst + leaders).contains(&c) {
            absorb(c, graph.vertex_weights()[v], coarse_adj(v));
        } else {
            let owner = proc_vrt.partition_point(|&s| s <= c) - 1;
            let rec = VertexRecord { global: c, weight: graph.vertex_weights()[v], vnum: c, adj: coarse_adj(v) };
            rec.push_words(outgoing.entry(owner).or_default());
        }
    }
    let msgs = outgoing
        .into_iter()
        .map(|(r, w)| Message::words(r, TAG_COARSE_ADJ, &w))
        .collect();
    for m in comm.exchange(msgs)? {
        for rec in VertexRecord::read_words(&m.to_words())? {
            absorb(rec.global, rec.weight, rec.adj);
        }
    }
    let recs = merged
        .into_iter()
        .enumerate()
        .map(|(i, (weight, adj))| VertexRecord {
            global: cfirst + i,
            weight,
            vnum: cfirst + i,
            adj: adj.into_iter().collect(),
        })
        .collect();
    let coarse = DistGraph::assemble(comm, proc_vrt, recs, graph.base())?;
    Ok((coarse, cmap.into_iter().map(|c| c as usize).collect()))
}

/// Coarsens until every rank holds a small centralized graph.
pub fn coarsen_to_bottom(comm: &Comm, graph: DistGraph, params: &Params) -> Result<Hierarchy> {
    let mut levels = Vec::new();
    let mut g = graph;
    let mut c = comm.clone();
    let mut stalled = false;
    loop {
        let n = g.global_count();
        let p = c.size();
        if p > 1 {
            let sparse = (n as f64) < (params.fold_min as f64) * p as f64;
            if stalled || n <= params.coarsest_size || sparse {
                let folded = g
                    .fold(&c, FoldTarget::Duplicate)?
                    .ok_or_else(|| Error::Invariant("fold-dup left a rank without a graph".into()))?;
                let (_, sub) = c.split()?;
                levels.push(CoarseningLevel { fine: g, comm: c, action: FoldAction::FoldDup, fine_to_coarse: Vec::new() });
                g = folded;
                c = sub;
                continue;
            }
        } else if stalled || n <= params.coarsest_size {
            break;
        }
        let matching = match_graph(&c, &g, params)?;
        let (coarse, map) = coarse_build(&c, &g, &matching)?;
        let cn = coarse.global_count();
        if cn == n {
            stalled = true;
            continue;
        }
        if cn as f64 > params.ratio_max * n as f64 {
            stalled = true;
        }
        levels.push(CoarseningLevel { fine: g, comm: c.clone(), action: FoldAction::None, fine_to_coarse: map });
        g = coarse;
    }
    Ok(Hierarchy { levels, coarsest: g, coarsest_comm: c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist_graph::block_owners;
    use crate::graph::Graph;
    use crate::procsim::ProcGroup;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn on_one_rank<R: Send>(g: &Graph, f: impl Fn(&Comm, DistGraph) -> Result<R> + Sync) -> R {
        ProcGroup::new(1, 5)
            .run(|c| f(c, DistGraph::from_graph(g, (0..g.vertex_count()).collect(), 0)?))
            .unwrap()
            .pop()
            .unwrap()
    }

    #[test]
    fn single_edge_matches() {
        let m = on_one_rank(&path(2), |c, g| match_graph(c, &g, &Params::default()));
        assert_eq!(m.mate, vec![Some(1), Some(0)]);
    }

    #[test]
    fn heavy_edge_wins_in_triangle() {
        let mut g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        for v in 0..3 {
            for i in g.xadj[v]..g.xadj[v + 1] {
                let u = g.adjncy[i];
                if (v, u) == (0, 1) || (v, u) == (1, 0) {
                    g.ewgt[i] = 5;
                }
            }
        }
        for seed in 0..8u64 {
            let m = on_one_rank(&g, |c, dg| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                match_with_queue(c, &dg, &Params::default(), vec![0, 1, 2], &mut rng)
            });
            assert_eq!(m.mate, vec![Some(1), Some(0), None]);
        }
    }

    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn path4_collapses_to_p2() {
        let (coarse, map) = on_one_rank(&path(4), |c, g| {
            let m = Matching { mate: vec![Some(1), Some(0), Some(3), Some(2)], passes: 0 };
            coarse_build(c, &g, &m)
        });
        assert_eq!(map, vec![0, 0, 1, 1]);
        let cg = coarse.to_graph();
        assert_eq!(cg.vwgt, vec![2, 2]);
        assert_eq!(cg.adjncy, vec![1, 0]);
        assert_eq!(cg.ewgt, vec![1, 1]);
    }

    #[test]
    fn empty_matching_is_identity() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let (coarse, _) = on_one_rank(&g, |c, dg| coarse_build(c, &dg, &Matching::empty(&dg)));
        let mut cg = coarse.to_graph();
        cg.validate().unwrap();
        cg.ewgt.iter_mut().for_each(|w| assert_eq!(*w, 1));
        assert_eq!(cg.edge_list(), g.edge_list());
    }

    #[test]
    fn triangle_pair_merges_parallel_edges() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let (coarse, _) = on_one_rank(&g, |c, dg| {
            let m = Matching { mate: vec![Some(1), Some(0), None], passes: 0 };
            coarse_build(c, &dg, &m)
        });
        let cg = coarse.to_graph();
        assert_eq!(cg.vwgt, vec![2, 1]);
        assert_eq!(cg.ewgt, vec![2, 2]);
    }

    #[test]
    fn asymmetric_matching_rejected() {
        let err = on_one_rank(&path(3), |c, dg| {
            let m = Matching { mate: vec![Some(1), None, None], passes: 0 };
            Ok(coarse_build(c, &dg, &m).unwrap_err())
        });
        assert!(matches!(err, Error::Invariant(_)));
    }

    #[test]
    fn cross_rank_path_matching_valid() {
        let g = path(4);
        for seed in 0..32 {
            ProcGroup::new(2, seed)
                .run(|c| {
                    let dg = DistGraph::scatter(&g, &block_owners(4, 2), 2, c.rank(), 0)?;
                    let m = match_graph(c, &dg, &Params::default())?;
                    check_matching(c, &dg, &m)?;
                    let pairs = c.all_reduce_sum(0, &[m.pair_count_local() as i64])?[0];
                    assert!(pairs >= 2, "seed {seed}: no pair matched");
                    Ok(())
                })
                .unwrap();
        }
    }

    #[test]
    fn path64_levels_shrink() {
        let (sizes, weight) = on_one_rank(&path(64), |c, g| {
            let params = Params { coarsest_size: 8, ..Params::default() };
            let h = coarsen_to_bottom(c, g, &params)?;
            let mut sizes: Vec<usize> = h.levels.iter().map(|l| l.fine.global_count()).collect();
            sizes.push(h.coarsest.global_count());
            Ok((sizes, h.coarsest.vertex_weights().iter().sum::<i64>()))
        });
        assert!(sizes.windows(2).all(|w| w[1] < w[0]), "{sizes:?}");
        assert!(*sizes.last().unwrap() <= 8);
        assert_eq!(weight, 64);
    }

    #[test]
    fn coarsest_threshold_equal_to_size_means_no_levels() {
        let (levels, n) = on_one_rank(&path(10), |c, g| {
            let h = coarsen_to_bottom(c, g, &Params { coarsest_size: 10, ..Params::default() })?;
            Ok((h.levels.len(), h.coarsest.global_count()))
        });
        assert_eq!((levels, n), (0, 10));
    }

    #[test]
    fn fold_dup_fires_first_on_two_ranks() {
        let g = path(64);
        let out = ProcGroup::new(2, 1)
            .run(|c| {
                let dg = DistGraph::scatter(&g, &block_owners(64, 2), 2, c.rank(), 0)?;
                let h = coarsen_to_bottom(c, dg, &Params { coarsest_size: 8, ..Params::default() })?;
                Ok((h.fold_actions(), h.coarsest.procs()))
            })
            .unwrap();
        for (actions, procs) in out {
            assert_eq!(actions[0], FoldAction::FoldDup);
            assert!(actions[1..].iter().all(|&a| a == FoldAction::None));
            assert_eq!(procs, 1);
        }
    }

    #[test]
    fn edgeless_graph_stalls_gracefully() {
        let g = Graph::from_edges(200, &[]).unwrap();
        let (levels, n) = on_one_rank(&g, |c, dg| {
            let h = coarsen_to_bottom(c, dg, &Params::default())?;
            Ok((h.levels.len(), h.coarsest.global_count()))
        });
        assert_eq!((levels, n), (0, 200));
    }
}
