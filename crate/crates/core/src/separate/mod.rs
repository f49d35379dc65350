//! Vertex separators: partitions, cost order, refinement and the multilevel driver.

mod band;
mod fm;
mod initial;
mod multilevel;

pub use band::{band_extract, band_refine_multiseq, BandGraph};
pub use fm::{fm_refine, fm_refine_pinned, perturb};
pub use initial::initial_separator;
pub use multilevel::{compute_separator, dist_cost, check_dist_separator, uncoarsen};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Label of a separator vertex.
pub const SEP: u8 = 2;

/// Allowed weight difference between the two parts.
///
/// The bound is `max(floor(tol * total), heaviest vertex)`, so that graphs
/// whose vertex weights make the tolerance unreachable still admit a
/// balanced state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Balance {
    pub max_diff: i64,
}

impl Balance {
    pub fn new(total: i64, tol: f64, max_vertex_weight: i64) -> Balance {
        let by_tol = (tol * total as f64).floor() as i64;
        Balance { max_diff: by_tol.max(max_vertex_weight).max(0) }
    }

    pub fn of_graph(graph: &Graph, tol: f64) -> Balance {
        let heaviest = graph.vwgt.iter().copied().max().unwrap_or(0);
        Balance::new(graph.total_weight(), tol, heaviest)
    }
}

/// Separator cost, compared lexicographically: balance excess, separator
/// weight, then raw part weight difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cost {
    pub excess: i64,
    pub sep: i64,
    pub diff: i64,
}

impl Cost {
    pub fn from_weights(w: [i64; 3], bal: Balance) -> Cost {
        let diff = (w[0] - w[1]).abs();
        Cost { excess: (diff - bal.max_diff).max(0), sep: w[2], diff }
    }

    pub(crate) fn to_words(self) -> [u64; 3] {
        [self.excess as u64, self.sep as u64, self.diff as u64]
    }

    pub(crate) fn from_words(w: &[u64]) -> Cost {
        Cost { excess: w[0] as i64, sep: w[1] as i64, diff: w[2] as i64 }
    }
}

/// Two-way vertex partition of a centralized graph: labels 0, 1, or [`SEP`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub parts: Vec<u8>,
    /// Weights of part 0, part 1 and the separator.
    pub weights: [i64; 3],
}

impl Partition {
    pub fn new(graph: &Graph, parts: Vec<u8>) -> Partition {
        let weights = part_weights(&graph.vwgt, &parts);
        Partition { parts, weights }
    }

    /// Everything in part 0 (valid for any graph).
    pub fn trivial(graph: &Graph) -> Partition {
        Partition::new(graph, vec![0; graph.vertex_count()])
    }

    pub fn separator_weight(&self) -> i64 {
        self.weights[2]
    }

    /// |w0 - w1| / (w0 + w1 + wsep), or 0 for an empty graph.
    pub fn imbalance(&self) -> f64 {
        let total: i64 = self.weights.iter().sum();
        if total == 0 {
            0.0
        } else {
            (self.weights[0] - self.weights[1]).abs() as f64 / total as f64
        }
    }

    pub fn cost(&self, bal: Balance) -> Cost {
        Cost::from_weights(self.weights, bal)
    }

    pub fn separator(&self) -> Vec<usize> {
        (0..self.parts.len()).filter(|&v| self.parts[v] == SEP).collect()
    }

    /// Checks labels, stored weights, and that no edge joins part 0 to part 1.
    pub fn check(&self, graph: &Graph) -> Result<()> {
        if self.parts.len() != graph.vertex_count() {
            return Err(Error::Invariant("partition length differs from vertex count".into()));
        }
        if self.parts.iter().any(|&p| p > SEP) {
            return Err(Error::Invariant("partition label out of range".into()));
        }
        if part_weights(&graph.vwgt, &self.parts) != self.weights {
            return Err(Error::Invariant("stored part weights are stale".into()));
        }
        for v in 0..graph.vertex_count() {
            let pv = self.parts[v];
            if pv == SEP {
                continue;
            }
            if graph.neighbors(v).iter().any(|&u| self.parts[u] == 1 - pv) {
                return Err(Error::Invariant(format!("edge from vertex {v} crosses the separator")));
            }
        }
        Ok(())
    }
}

pub(crate) fn part_weights(vwgt: &[i64], parts: &[u8]) -> [i64; 3] {
    let mut w = [0i64; 3];
    for (&p, &x) in parts.iter().zip(vwgt) {
        w[p as usize] += x;
    }
    w
}
