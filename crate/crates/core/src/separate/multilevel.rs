//! Multilevel separator computation: coarsen, separate the coarsest graphs on
//! every rank, then project back and refine level by level, keeping the better
//! of the two sibling results wherever fold-dup had split the group.

use std::collections::BTreeMap;

use super::{band_refine_multiseq, initial_separator, part_weights, Balance, Cost, SEP};
use crate::coarsen::{coarsen_to_bottom, FoldAction, Hierarchy};
use crate::dist_graph::DistGraph;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::procsim::{split_sizes, Comm, Message};

const TAG_COST: u32 = 0x400;
const TAG_FETCH_REQ: u32 = 0x401;
const TAG_FETCH_REPLY: u32 = 0x402;
const TAG_UNFOLD: u32 = 0x403;
const TAG_CHECK: u32 = 0x404;

/// Balance bound for a distributed graph.
pub(crate) fn dist_balance(comm: &Comm, graph: &DistGraph, tol: f64) -> Result<Balance> {
    let total: i64 = graph.vertex_weights().iter().sum();
    let heaviest = graph.vertex_weights().iter().copied().max().unwrap_or(0);
    let all = comm.all_gather_words(TAG_COST, &[total as u64, heaviest as u64])?;
    let total = all.iter().map(|w| w[0] as i64).sum();
    let heaviest = all.iter().map(|w| w[1] as i64).max().unwrap_or(0);
    Ok(Balance::new(total, tol, heaviest))
}

/// Global part weights and cost of distributed labels.
pub fn dist_cost(comm: &Comm, graph: &DistGraph, parts: &[u8], bal: Balance) -> Result<([i64; 3], Cost)> {
    let w = part_weights(graph.vertex_weights(), &parts[..graph.local_count()]);
    let s = comm.all_reduce_sum(TAG_COST, &w)?;
    let w = [s[0], s[1], s[2]];
    Ok((w, Cost::from_weights(w, bal)))
}

/// Collective check that no edge joins part 0 and part 1.
pub fn check_dist_separator(comm: &Comm, graph: &DistGraph, parts: &[u8]) -> Result<()> {
    let nloc = graph.local_count();
    let labels = graph.halo_extend(comm, &parts[..nloc])?;
    let mut bad = 0i64;
    for v in 0..nloc {
        if labels[v] > SEP {
            bad += 1;
            continue;
        }
        if labels[v] != SEP && graph.neighbors_gst(v).iter().any(|&u| labels[u] == 1 - labels[v]) {
            bad += 1;
        }
    }
    let bad = comm.all_reduce_sum(TAG_CHECK, &[bad])?[0];
    if bad > 0 {
        return Err(Error::Invariant(format!("{bad} vertices violate the separator property")));
    }
    Ok(())
}

/// Fetches labels of coarse vertices `wanted` (global indices) from their owners.
fn fetch_labels(comm: &Comm, coarse: &DistGraph, coarse_parts: &[u8], wanted: &[usize]) -> Result<Vec<u8>> {
    let mut requests: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for &c in wanted {
        requests.entry(coarse.owner(c)).or_default().push(c as u64);
    }
    let outgoing = requests.iter().map(|(&r, w)| Message::words(r, TAG_FETCH_REQ, w)).collect();
    let first = coarse.first_global();
    let replies = comm
        .exchange(outgoing)?
        .into_iter()
        .map(|m| {
            let words: Vec<u64> = m.to_words().iter().map(|&c| coarse_parts[c as usize - first] as u64).collect();
            Message::words(m.source, TAG_FETCH_REPLY, &words)
        })
        .collect();
    let mut answers: BTreeMap<usize, std::vec::IntoIter<u64>> = comm
        .exchange(replies)?
        .into_iter()
        .map(|m| (m.source, m.to_words().into_iter()))
        .collect();
    wanted
        .iter()
        .map(|&c| {
            answers
                .get_mut(&coarse.owner(c))
                .and_then(|it| it.next())
                .map(|w| w as u8)
                .ok_or_else(|| Error::Invariant(format!("no label returned for coarse vertex {c}")))
        })
        .collect()
}

/// Copies coarse labels onto fine vertices through the fine-to-coarse map.
fn project(comm: &Comm, fine: &DistGraph, map: &[usize], coarse: &DistGraph, coarse_parts: &[u8]) -> Result<Vec<u8>> {
    let nloc = fine.local_count();
    let range = coarse.local_range();
    let mut out = vec![0u8; nloc];
    let mut remote = Vec::new();
    for v in 0..nloc {
        let c = map[v];
        if range.contains(&c) {
            out[v] = coarse_parts[c - range.start];
        } else {
            remote.push(v);
        }
    }
    let wanted: Vec<usize> = remote.iter().map(|&v| map[v]).collect();
    let labels = fetch_labels(comm, coarse, coarse_parts, &wanted)?;
    for (v, l) in remote.into_iter().zip(labels) {
        out[v] = l;
    }
    Ok(out)
}

/// Picks the better half's partition of a fold-dup level and redistributes it
/// onto the parent distribution.
fn unfold_best(
    parent: &Comm,
    fine: &DistGraph,
    half: &Comm,
    folded: &DistGraph,
    folded_parts: &[u8],
    tol: f64,
) -> Result<Vec<u8>> {
    let bal = dist_balance(half, folded, tol)?;
    let (_, cost) = dist_cost(half, folded, folded_parts, bal)?;
    let costs = parent.all_gather_words(TAG_COST, &cost.to_words())?;
    let (first, _) = split_sizes(parent.size());
    let side_of = |r: usize| usize::from(r >= first);
    let winner_rank = (0..parent.size())
        .min_by_key(|&r| (Cost::from_words(&costs[r]), side_of(r)))
        .unwrap();
    let winner = side_of(winner_rank);
    let mut outgoing: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    if side_of(parent.rank()) == winner {
        let start = folded.first_global();
        for (i, &l) in folded_parts[..folded.local_count()].iter().enumerate() {
            let g = start + i;
            outgoing.entry(fine.owner(g)).or_default().extend([g as u64, l as u64]);
        }
    }
    let msgs = outgoing.into_iter().map(|(r, w)| Message::words(r, TAG_UNFOLD, &w)).collect();
    let mut out = vec![u8::MAX; fine.local_count()];
    let start = fine.first_global();
    for m in parent.exchange(msgs)? {
        for pair in m.to_words().chunks_exact(2) {
            out[pair[0] as usize - start] = pair[1] as u8;
        }
    }
    if out.contains(&u8::MAX) {
        return Err(Error::Invariant("fold-dup projection left vertices unlabeled".into()));
    }
    Ok(out)
}

/// Projects the coarsest partitions back to the finest graph, refining at
/// every level.
pub fn uncoarsen(hier: &Hierarchy, coarsest_parts: Vec<u8>, params: &Params) -> Result<Vec<u8>> {
    let refine = |comm: &Comm, g: &DistGraph, parts: &[u8]| -> Result<Vec<u8>> {
        let bal = dist_balance(comm, g, params.balance_tol)?;
        band_refine_multiseq(comm, g, parts, bal, params)
    };
    let mut parts = refine(&hier.coarsest_comm, &hier.coarsest, &coarsest_parts)?;
    let mut coarse = &hier.coarsest;
    let mut coarse_comm = &hier.coarsest_comm;
    for level in hier.levels.iter().rev() {
        parts = match level.action {
            FoldAction::None => {
                let projected = project(&level.comm, &level.fine, &level.fine_to_coarse, coarse, &parts)?;
                refine(&level.comm, &level.fine, &projected)?
            }
            FoldAction::FoldDup => {
                unfold_best(&level.comm, &level.fine, coarse_comm, coarse, &parts, params.balance_tol)?
            }
        };
        coarse = &level.fine;
        coarse_comm = &level.comm;
    }
    Ok(parts)
}

/// Computes a vertex separator of a distributed graph; returns local labels.
pub fn compute_separator(comm: &Comm, graph: &DistGraph, params: &Params) -> Result<Vec<u8>> {
    let hier = coarsen_to_bottom(comm, graph.clone(), params)?;
    let coarsest = hier.coarsest.to_graph();
    let mut rng = hier.coarsest_comm.rng();
    let bal = Balance::of_graph(&coarsest, params.balance_tol);
    let initial = initial_separator(&coarsest, &mut rng, params.tries, bal, params);
    uncoarsen(&hier, initial.parts, params)
}
