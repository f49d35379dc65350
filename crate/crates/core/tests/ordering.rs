mod common;

use common::{dense_counts, opc, random_graph};
use ndorder::coarsen::{coarsen_to_bottom, FoldAction};
use ndorder::dist_graph::{block_owners, DistGraph};
use ndorder::procsim::ProcGroup;
use ndorder::{gen, order_graph, order_graph_tree, symbolic_factor, Graph, InvPerm, OrderNode, OrderOptions, Params, Schedule};

fn opts(procs: usize, seed: u64, params: Params) -> OrderOptions {
    OrderOptions { procs, seed, schedule: Schedule::Parallel, params }
}

#[test]
fn edgeless_graph_has_no_fill() {
    let g = Graph::from_edges(20, &[]).unwrap();
    for p in [1, 3] {
        let perm = order_graph(&g, &opts(p, 0, Params::default())).unwrap();
        assert_eq!(symbolic_factor(&g, &perm).unwrap().opc, 20);
    }
}

#[test]
fn grid3_top_separator_takes_last_indices() {
    let g = gen::grid2d(3);
    let params = Params { nd_cutoff: 4, ..Params::default() };
    let (tree, perm) = order_graph_tree(&g, &opts(1, 0, params)).unwrap();
    let OrderNode::Dissection { sep: Some(sep), part0, part1, .. } = &tree else {
        panic!("expected a dissection at the root, got {tree:?}");
    };
    assert_eq!((sep.start(), sep.size()), (6, 3));
    assert_eq!(part0.as_ref().unwrap().size(), 3);
    assert_eq!(part1.as_ref().unwrap().size(), 3);
    let sep_verts = &perm.as_slice()[6..];
    let parts: Vec<u8> = (0..9).map(|v| if sep_verts.contains(&v) { 2 } else { 0 }).collect();
    assert!(common::bfs_dist(&g, &parts.iter().map(|&p| p == 2).collect::<Vec<_>>()).iter().all(|&d| d <= 2));
    let rest: Vec<usize> = perm.as_slice()[..6].to_vec();
    // the two parts are not adjacent once the separator is removed
    for &a in &rest[..3] {
        for &b in &rest[3..] {
            assert!(!g.neighbors(a).contains(&b));
        }
    }
}

#[test]
fn path7_on_two_ranks() {
    let g = gen::path(7);
    // halves of three vertices go to minimum degree, which leaves a path fill-free
    let params = Params { nd_cutoff: 3, ..Params::default() };
    let perm = order_graph(&g, &opts(2, 1, params)).unwrap();
    assert_eq!(perm.as_slice()[6], 3);
    let nd = opc(&dense_counts(&g, perm.as_slice()));
    let natural = opc(&dense_counts(&g, &(0..7).collect::<Vec<_>>()));
    assert!(nd <= natural);
    assert_eq!(symbolic_factor(&g, &perm).unwrap().opc, nd);
}

#[test]
fn trees_tile_and_put_separators_last() {
    let graphs = [gen::grid2d(12), gen::grid3d(5), random_graph(150, 2.0, 4), gen::star(40), gen::path(130)];
    for g in &graphs {
        for p in [1, 2, 3, 4] {
            for cutoff in [8, 120] {
                let params = Params { nd_cutoff: cutoff, coarsest_size: 30, ..Params::default() };
                let (tree, perm) = order_graph_tree(g, &opts(p, 11, params)).unwrap();
                tree.check().unwrap();
                assert_eq!(tree.size(), g.vertex_count());
                assert_eq!(perm.len(), g.vertex_count());
                InvPerm::new(perm.into_vec()).unwrap();
            }
        }
    }
}

#[test]
fn disconnected_graph_orders_components() {
    let mut e = Vec::new();
    for i in 1..60 {
        if i != 30 {
            e.push((i - 1, i));
        }
    }
    let g = Graph::from_edges(60, &e).unwrap();
    let params = Params { nd_cutoff: 10, coarsest_size: 20, ..Params::default() };
    for p in [1, 2] {
        let perm = order_graph(&g, &opts(p, 2, params.clone())).unwrap();
        let s = symbolic_factor(&g, &perm).unwrap();
        assert_eq!(s.counts, dense_counts(&g, perm.as_slice()));
    }
}

#[test]
fn more_ranks_than_vertices() {
    let g = gen::path(5);
    let perm = order_graph(&g, &opts(8, 0, Params::default())).unwrap();
    assert_eq!(perm.len(), 5);
    let empty = Graph::from_edges(0, &[]).unwrap();
    assert!(order_graph(&empty, &opts(3, 0, Params::default())).unwrap().is_empty());
}

#[test]
fn ordering_is_deterministic_across_runs_and_schedules() {
    let g = gen::grid2d(20);
    for p in [1, 3, 4] {
        let reference = order_graph(&g, &opts(p, 5, Params::default())).unwrap();
        for _ in 0..2 {
            assert_eq!(order_graph(&g, &opts(p, 5, Params::default())).unwrap(), reference);
        }
        let seq = OrderOptions { schedule: Schedule::Sequential, ..opts(p, 5, Params::default()) };
        assert_eq!(order_graph(&g, &seq).unwrap(), reference);
    }
}

#[test]
fn fold_dup_footprint_is_bounded() {
    for g in [gen::grid2d(24), gen::grid3d(8), random_graph(400, 3.0, 1)] {
        let n = g.vertex_count();
        for p in [2, 4, 8] {
            let owner = block_owners(n, p);
            let out = ProcGroup::new(p, 9)
                .run(|c| {
                    let f = DistGraph::scatter(&g, &owner, p, c.rank(), 0)?;
                    let h = coarsen_to_bottom(c, f, &Params::default())?;
                    Ok((h.stored_vertices(), h.fold_actions().contains(&FoldAction::FoldDup)))
                })
                .unwrap();
            for (stored, folded) in out {
                assert!(folded);
                assert!(stored <= 4 * n, "p={p} stored={stored} n={n}");
            }
        }
    }
}
