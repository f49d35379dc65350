//! Vertex-oriented Fiduccia-Mattheyses refinement.
//!
//! A move takes a separator vertex `v` into part `i`; its neighbors in the
//! other part are pulled into the separator. Only separator vertices are
//! candidates, so gains are only ever evaluated next to the separator. Each
//! pass locks moved vertices, accepts up to `fm_backtrack` consecutive
//! non-improving moves, and rolls back to the best state seen.

use rand::Rng;

use super::{Balance, Cost, Partition, SEP};
use crate::graph::Graph;
use crate::params::Params;

struct Refiner<'a> {
    graph: &'a Graph,
    pinned: &'a [bool],
    parts: Vec<u8>,
    weights: [i64; 3],
    sep: Vec<usize>,
    sep_pos: Vec<usize>,
}

const NOT_IN_SEP: usize = usize::MAX;

impl<'a> Refiner<'a> {
    fn new(graph: &'a Graph, pinned: &'a [bool], p: Partition) -> Self {
        let mut r = Refiner {
            graph,
            pinned,
            parts: p.parts,
            weights: p.weights,
            sep: Vec::new(),
            sep_pos: vec![NOT_IN_SEP; graph.vertex_count()],
        };
        for v in 0..graph.vertex_count() {
            if r.parts[v] == SEP {
                r.sep_insert(v);
            }
        }
        r
    }

    fn sep_insert(&mut self, v: usize) {
        self.sep_pos[v] = self.sep.len();
        self.sep.push(v);
    }

    fn sep_remove(&mut self, v: usize) {
        let i = self.sep_pos[v];
        let last = *self.sep.last().unwrap();
        self.sep.swap_remove(i);
        if last != v {
            self.sep_pos[last] = i;
        }
        self.sep_pos[v] = NOT_IN_SEP;
    }

    /// Weight pulled into the separator by moving `v` to `side`, or `None` if a pinned vertex would be pulled.
    fn pulled(&self, v: usize, side: u8) -> Option<i64> {
        let other = 1 - side;
        let mut w = 0;
        for &u in self.graph.neighbors(v) {
            if self.parts[u] == other {
                if self.pinned[u] {
                    return None;
                }
                w += self.graph.vwgt[u];
            }
        }
        Some(w)
    }

    fn weights_after(&self, v: usize, side: u8, pulled: i64) -> [i64; 3] {
        let mut w = self.weights;
        let s = side as usize;
        w[s] += self.graph.vwgt[v];
        w[1 - s] -= pulled;
        w[2] += pulled - self.graph.vwgt[v];
        w
    }

    fn set(&mut self, v: usize, label: u8, log: &mut Vec<(usize, u8)>) {
        let old = self.parts[v];
        if old == label {
            return;
        }
        log.push((v, old));
        let w = self.graph.vwgt[v];
        self.weights[old as usize] -= w;
        self.weights[label as usize] += w;
        if old == SEP {
            self.sep_remove(v);
        }
        if label == SEP {
            self.sep_insert(v);
        }
        self.parts[v] = label;
    }

    fn apply(&mut self, v: usize, side: u8, log: &mut Vec<(usize, u8)>) {
        self.set(v, side, log);
        let other = 1 - side;
        for i in self.graph.xadj[v]..self.graph.xadj[v + 1] {
            let u = self.graph.adjncy[i];
            if self.parts[u] == other {
                self.set(u, SEP, log);
            }
        }
    }

    fn rollback(&mut self, log: &mut Vec<(usize, u8)>, keep: usize) {
        let mut scratch = Vec::new();
        while log.len() > keep {
            let (v, old) = log.pop().unwrap();
            self.set(v, old, &mut scratch);
        }
    }

    fn cost(&self, bal: Balance) -> Cost {
        Cost::from_weights(self.weights, bal)
    }

    /// One pass; returns true if the state improved.
    fn pass(&mut self, bal: Balance, backtrack: usize) -> bool {
        let n = self.graph.vertex_count();
        let mut locked = vec![false; n];
        let start = self.cost(bal);
        let mut best = start;
        let mut log = Vec::new();
        let mut best_len = 0;
        let mut since_best = 0;
        loop {
            let mut choice: Option<(Cost, usize, u8)> = None;
            for &v in &self.sep {
                if locked[v] || self.pinned[v] {
                    continue;
                }
                for side in 0..2u8 {
                    let Some(pulled) = self.pulled(v, side) else { continue };
                    let c = Cost::from_weights(self.weights_after(v, side, pulled), bal);
                    let key = (c, v, side);
                    if choice.is_none_or(|b| key < b) {
                        choice = Some(key);
                    }
                }
            }
            let Some((cost, v, side)) = choice else { break };
            self.apply(v, side, &mut log);
            locked[v] = true;
            debug_assert_eq!(cost, self.cost(bal));
            if cost < best {
                best = cost;
                best_len = log.len();
                since_best = 0;
            } else {
                since_best += 1;
                if since_best > backtrack {
                    break;
                }
            }
        }
        self.rollback(&mut log, best_len);
        best < start
    }
}

/// Refines a separator; the result never costs more than the input.
pub fn fm_refine(graph: &Graph, partition: Partition, bal: Balance, params: &Params) -> Partition {
    let pinned = vec![false; graph.vertex_count()];
    fm_refine_pinned(graph, partition, bal, params, &pinned)
}

/// As [`fm_refine`], but vertices flagged in `pinned` never change label.
pub fn fm_refine_pinned(graph: &Graph, partition: Partition, bal: Balance, params: &Params, pinned: &[bool]) -> Partition {
    let mut r = Refiner::new(graph, pinned, partition);
    for _ in 0..params.fm_pass_max {
        if !r.pass(bal, params.fm_backtrack) {
            break;
        }
    }
    Partition { parts: r.parts, weights: r.weights }
}

/// Applies up to `moves` random separator moves that keep the partition valid.
pub fn perturb<R: Rng>(graph: &Graph, partition: Partition, moves: usize, pinned: &[bool], rng: &mut R) -> Partition {
    let mut r = Refiner::new(graph, pinned, partition);
    let mut log = Vec::new();
    for _ in 0..moves {
        let free: Vec<usize> = r.sep.iter().copied().filter(|&v| !pinned[v]).collect();
        if free.is_empty() {
            break;
        }
        let v = free[rng.gen_range(0..free.len())];
        let side = rng.gen_range(0..2u8);
        if r.pulled(v, side).is_some() {
            r.apply(v, side, &mut log);
        }
    }
    Partition { parts: r.parts, weights: r.weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn grid(k: usize) -> Graph {
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
        Graph::from_edges(k * k, &e).unwrap()
    }

    #[test]
    fn optimal_p5_is_fixed_point() {
        let g = path(5);
        let p = Partition::new(&g, vec![0, 0, SEP, 1, 1]);
        let bal = Balance::of_graph(&g, 0.2);
        assert_eq!(fm_refine(&g, p.clone(), bal, &Params::default()), p);
    }

    #[test]
    fn p5_off_center_moves_to_middle() {
        let g = path(5);
        let p = Partition::new(&g, vec![0, SEP, 1, 1, 1]);
        let bal = Balance::of_graph(&g, 0.2);
        let r = fm_refine(&g, p, bal, &Params::default());
        assert_eq!(r.parts, vec![0, 0, SEP, 1, 1]);
        assert_eq!(r.cost(bal), Cost { excess: 0, sep: 1, diff: 0 });
    }

    #[test]
    fn grid3_row_separator_does_not_grow() {
        let g = grid(3);
        let p = Partition::new(&g, vec![0, 0, 0, SEP, SEP, SEP, 1, 1, 1]);
        let bal = Balance::of_graph(&g, 0.2);
        let before = p.cost(bal);
        let r = fm_refine(&g, p, bal, &Params::default());
        r.check(&g).unwrap();
        assert!(r.cost(bal) <= before);
        assert!(r.separator_weight() <= 3);
    }

    #[test]
    fn pinned_vertices_stay() {
        let g = path(5);
        let pinned = [true, false, false, false, true];
        let p = Partition::new(&g, vec![0, SEP, SEP, SEP, 1]);
        let bal = Balance::of_graph(&g, 0.2);
        let r = fm_refine_pinned(&g, p, bal, &Params::default(), &pinned);
        r.check(&g).unwrap();
        assert_eq!((r.parts[0], r.parts[4]), (0, 1));
        assert_eq!(r.separator_weight(), 1);
    }

    #[test]
    fn perturbation_keeps_validity() {
        use rand_chacha::rand_core::SeedableRng;
        let g = grid(6);
        let mut parts = vec![0u8; 36];
        for v in 0..36 {
            parts[v] = match v % 6 {
                0..=2 => 0,
                3 => SEP,
                _ => 1,
            };
        }
        let pinned = vec![false; 36];
        for seed in 0..20 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = perturb(&g, Partition::new(&g, parts.clone()), 4, &pinned, &mut rng);
            p.check(&g).unwrap();
        }
    }
}
