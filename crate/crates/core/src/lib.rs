//! Multilevel nested dissection ordering on a simulated distributed-memory
//! runtime, with symbolic Cholesky evaluation.

pub mod coarsen;
pub mod dist_graph;
pub mod error;
pub mod eval;
pub mod gen;
pub mod graph;
pub mod io;
pub mod order;
pub mod params;
pub mod procsim;
pub mod separate;

pub use error::{Error, Result};
pub use eval::{elimination_stats, symbolic_factor, ElimStats};
pub use graph::Graph;
pub use order::{InvPerm, OrderNode};
pub use params::Params;
pub use procsim::Schedule;

use dist_graph::{block_owners, DistGraph};
use procsim::ProcGroup;

/// Options for [`order_graph`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrderOptions {
    pub procs: usize,
    pub seed: u64,
    pub schedule: Schedule,
    pub params: Params,
}

impl Default for OrderOptions {
    fn default() -> Self {
        OrderOptions { procs: 1, seed: 0, schedule: Schedule::Parallel, params: Params::default() }
    }
}

/// Orders a graph by nested dissection on `opts.procs` simulated ranks and
/// returns the separator tree with its inverse permutation.
///
/// Vertices start distributed in contiguous blocks of ceil(n / procs).
pub fn order_graph_tree(graph: &Graph, opts: &OrderOptions) -> Result<(OrderNode, InvPerm)> {
    graph.validate()?;
    if opts.procs == 0 {
        return Err(Error::GroupTooSmall(0));
    }
    let n = graph.vertex_count();
    if n == 0 {
        let tree = OrderNode::Leaf { start: 0, perm: Vec::new() };
        return Ok((tree, InvPerm::identity(0)));
    }
    let owner = block_owners(n, opts.procs);
    let group = ProcGroup::new(opts.procs, opts.seed).with_schedule(opts.schedule);
    let fragments = group.run(|comm| {
        let dg = DistGraph::scatter(graph, &owner, opts.procs, comm.rank(), 0)?;
        order::nested_dissection(comm, dg, 0, &opts.params)
    })?;
    let tree = order::merge_fragments(fragments)?.ok_or_else(|| Error::Invariant("no rank returned an ordering".into()))?;
    let perm = order::assemble(&tree, n)?;
    Ok((tree, perm))
}

/// Orders a graph; see [`order_graph_tree`].
pub fn order_graph(graph: &Graph, opts: &OrderOptions) -> Result<InvPerm> {
    order_graph_tree(graph, opts).map(|(_, p)| p)
}
