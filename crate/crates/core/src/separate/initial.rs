use std::collections::VecDeque;

use rand::Rng;

use super::{fm_refine, Balance, Partition, SEP};
use crate::graph::Graph;
use crate::params::Params;

/// Best of `tries` greedy-growing attempts, each refined by FM.
///
/// An attempt grows part 0 breadth-first from a random vertex (restarting in a
/// fresh random vertex whenever a component is exhausted) until it holds half
/// the total weight; the grown vertices adjacent to the rest become the
/// separator.
pub fn initial_separator<R: Rng>(graph: &Graph, rng: &mut R, tries: usize, bal: Balance, params: &Params) -> Partition {
    let n = graph.vertex_count();
    if n == 0 {
        return Partition { parts: Vec::new(), weights: [0; 3] };
    }
    let mut best: Option<Partition> = None;
    for _ in 0..tries.max(1) {
        let candidate = fm_refine(graph, grow(graph, rng), bal, params);
        if best.as_ref().is_none_or(|b| candidate.cost(bal) < b.cost(bal)) {
            best = Some(candidate);
        }
    }
    best.unwrap()
}

fn grow<R: Rng>(graph: &Graph, rng: &mut R) -> Partition {
    let n = graph.vertex_count();
    let total = graph.total_weight();
    let mut parts = vec![1u8; n];
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    let mut unvisited: Vec<usize> = (0..n).collect();
    let mut grown = 0;
    while 2 * grown < total {
        let v = match queue.pop_front() {
            Some(v) => v,
            None => {
                unvisited.retain(|&u| !queued[u]);
                if unvisited.is_empty() {
                    break;
                }
                let v = unvisited[rng.gen_range(0..unvisited.len())];
                queued[v] = true;
                v
            }
        };
        parts[v] = 0;
        grown += graph.vwgt[v];
        for &u in graph.neighbors(v) {
            if !queued[u] {
                queued[u] = true;
                queue.push_back(u);
            }
        }
    }
    let frontier: Vec<usize> = (0..n)
        .filter(|&v| parts[v] == 0 && graph.neighbors(v).iter().any(|&u| parts[u] == 1))
        .collect();
    for v in frontier {
        parts[v] = SEP;
    }
    Partition::new(graph, parts)
}
