//! Band graphs around a projected separator and multi-sequential refinement.

use rand::Rng;

use super::{fm_refine_pinned, perturb, Balance, Cost, Partition, SEP};
use crate::dist_graph::DistGraph;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::params::Params;
use crate::procsim::{decode_words, encode_words, Comm};

const TAG_BAND_COUNT: u32 = 0x300;
const TAG_BAND_GATHER: u32 = 0x301;
const TAG_BAND_COST: u32 = 0x302;
const TAG_BAND_BEST: u32 = 0x303;

const FAR: u64 = u64::MAX;

/// Centralized band graph: the band vertices in ascending global order,
/// followed by the part-0 anchor and the part-1 anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct BandGraph {
    pub graph: Graph,
    /// Labels of band vertices and anchors (anchor `i` is in part `i`).
    pub parts: Vec<u8>,
    /// Fine global index of every non-anchor band vertex.
    pub band_to_global: Vec<usize>,
    pub anchor_weights: [i64; 2],
}

impl BandGraph {
    pub fn band_count(&self) -> usize {
        self.band_to_global.len()
    }

    pub fn anchor(&self, part: usize) -> usize {
        self.band_count() + part
    }

    pub fn pinned(&self) -> Vec<bool> {
        let mut p = vec![false; self.graph.vertex_count()];
        p[self.anchor(0)] = true;
        p[self.anchor(1)] = true;
        p
    }

    pub fn partition(&self) -> Partition {
        Partition::new(&self.graph, self.parts.clone())
    }
}

/// Extracts the band of vertices within `width` hops of the separator and
/// centralizes it on every rank.
///
/// Distances spread from all separator vertices, one halo exchange per hop.
/// With `width == None` every vertex is kept. Returns
/// [`Error::EmptySeparator`] when there is nothing to band around.
pub fn band_extract(comm: &Comm, graph: &DistGraph, parts: &[u8], width: Option<usize>) -> Result<BandGraph> {
    let nloc = graph.local_count();
    let nslots = nloc + graph.ghost_count();
    let nsep = parts[..nloc].iter().filter(|&&p| p == SEP).count();
    let total_sep = comm.all_reduce_sum(TAG_BAND_COUNT, &[nsep as i64])?[0];
    if total_sep == 0 {
        return Err(Error::EmptySeparator);
    }
    let mut dist = vec![FAR; nslots];
    match width {
        Some(width) => {
            for v in 0..nloc {
                if parts[v] == SEP {
                    dist[v] = 0;
                }
            }
            for hop in 1..=width as u64 {
                graph.halo_exchange(comm, &mut dist)?;
                for v in 0..nloc {
                    if dist[v] == FAR && graph.neighbors_gst(v).iter().any(|&u| dist[u] == hop - 1) {
                        dist[v] = hop;
                    }
                }
            }
            graph.halo_exchange(comm, &mut dist)?;
        }
        None => dist.iter_mut().for_each(|d| *d = 0),
    }
    let last_layer = width.map_or(u64::MAX, |w| w as u64);

    // local full and banded part weights
    let mut sums = [0i64; 4];
    let mut words = Vec::new();
    for v in 0..nloc {
        let p = parts[v];
        if p < SEP {
            sums[p as usize] += graph.vertex_weights()[v];
        }
        if dist[v] == FAR {
            continue;
        }
        if p < SEP {
            sums[2 + p as usize] += graph.vertex_weights()[v];
        }
        let adj: Vec<usize> = graph
            .neighbors_gst(v)
            .iter()
            .filter(|&&u| dist[u] != FAR)
            .map(|&u| graph.global_of(u))
            .collect();
        words.extend([
            (graph.first_global() + v) as u64,
            graph.vertex_weights()[v] as u64,
            p as u64,
            u64::from(dist[v] == last_layer),
            adj.len() as u64,
        ]);
        words.extend(adj.iter().map(|&u| u as u64));
    }
    let sums = comm.all_reduce_sum(TAG_BAND_COUNT, &sums)?;
    let anchor_weights = [sums[0] - sums[2], sums[1] - sums[3]];

    let mut globals = Vec::new();
    let mut vwgt = Vec::new();
    let mut labels = Vec::new();
    let mut boundary = Vec::new();
    let mut adjs: Vec<Vec<usize>> = Vec::new();
    for chunk in comm.all_gather_words(TAG_BAND_GATHER, &words)? {
        let mut i = 0;
        while i < chunk.len() {
            let deg = chunk[i + 4] as usize;
            globals.push(chunk[i] as usize);
            vwgt.push(chunk[i + 1] as i64);
            labels.push(chunk[i + 2] as u8);
            boundary.push(chunk[i + 3] != 0);
            adjs.push(chunk[i + 5..i + 5 + deg].iter().map(|&u| u as usize).collect());
            i += 5 + deg;
        }
    }
    let nb = globals.len();
    let local_of = |g: usize| globals.binary_search(&g).expect("band neighbor missing from band");
    let mut lists: Vec<Vec<usize>> = adjs.iter().map(|a| a.iter().map(|&u| local_of(u)).collect()).collect();
    let mut anchor_lists = [Vec::new(), Vec::new()];
    for v in 0..nb {
        if boundary[v] && labels[v] < SEP {
            let a = labels[v] as usize;
            lists[v].push(nb + a);
            anchor_lists[a].push(v);
        }
    }
    lists.extend(anchor_lists);
    let mut graph_out = Graph { xadj: vec![0], ..Default::default() };
    for l in &lists {
        graph_out.adjncy.extend_from_slice(l);
        graph_out.xadj.push(graph_out.adjncy.len());
    }
    graph_out.ewgt = vec![1; graph_out.adjncy.len()];
    vwgt.extend(anchor_weights);
    graph_out.vwgt = vwgt;
    labels.extend([0, 1]);
    Ok(BandGraph { graph: graph_out, parts: labels, band_to_global: globals, anchor_weights })
}

/// Refines a distributed separator on centralized band copies, one FM run per
/// rank, and projects the best result back.
///
/// Rank 0 refines the unperturbed band, so the outcome never costs more than
/// the input. `parts` holds local labels (ghost slots, if any, are ignored);
/// returns the new local labels.
pub fn band_refine_multiseq(comm: &Comm, graph: &DistGraph, parts: &[u8], bal: Balance, params: &Params) -> Result<Vec<u8>> {
    let nloc = graph.local_count();
    let mut local = parts[..nloc].to_vec();
    local.resize(nloc + graph.ghost_count(), 0);
    let band = match band_extract(comm, graph, &local, params.band_width) {
        Ok(b) => b,
        Err(Error::EmptySeparator) => return Ok(parts[..nloc].to_vec()),
        Err(e) => return Err(e),
    };
    let pinned = band.pinned();
    let start = band.partition();
    let mut rng = comm.rng();
    let candidate = if comm.rank() == 0 || band.graph.vertex_count() <= params.band_max {
        let start = if comm.rank() == 0 {
            start.clone()
        } else {
            let moves = rng.gen_range(1..=params.perturb_moves.max(1));
            perturb(&band.graph, start.clone(), moves, &pinned, &mut rng)
        };
        let refined = fm_refine_pinned(&band.graph, start, bal, params, &pinned);
        if refined.parts[band.anchor(0)] != 0 || refined.parts[band.anchor(1)] != 1 {
            band.partition()
        } else {
            refined
        }
    } else {
        start
    };

    let costs = comm.all_gather_words(TAG_BAND_COST, &candidate.cost(bal).to_words())?;
    let winner = (0..comm.size())
        .min_by_key(|&r| (Cost::from_words(&costs[r]), r))
        .unwrap();
    let payload = if comm.rank() == winner {
        encode_words(&candidate.parts.iter().map(|&p| p as u64).collect::<Vec<_>>())
    } else {
        Vec::new()
    };
    let best = decode_words(&comm.broadcast(TAG_BAND_BEST, winner, payload)?);
    let range = graph.local_range();
    let mut out = parts[..nloc].to_vec();
    for (i, &g) in band.band_to_global.iter().enumerate() {
        if range.contains(&g) {
            out[g - range.start] = best[i] as u8;
        }
    }
    Ok(out)
}
