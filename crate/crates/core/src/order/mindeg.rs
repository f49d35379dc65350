//! Minimum degree ordering on a quotient graph.
//!
//! Eliminated vertices become elements; a variable's degree is the size of
//! the union of its variable neighbors and the members of its adjacent
//! elements. Eliminating a variable merges all of its adjacent elements into a
//! new one. Ties are broken by the lowest label.

use std::collections::BTreeSet;

use crate::graph::Graph;

/// Elimination order (local vertex indices) for `graph`; `labels[v]` breaks ties.
pub fn min_degree_order(graph: &Graph, labels: &[usize]) -> Vec<usize> {
    min_degree_order_halo(graph, labels, &vec![false; graph.vertex_count()])
}

/// As [`min_degree_order`], but vertices flagged in `halo` are never
/// eliminated: they stand for neighbors ordered later and only add to degrees.
/// Returns the order of the non-halo vertices.
pub fn min_degree_order_halo(graph: &Graph, labels: &[usize], halo: &[bool]) -> Vec<usize> {
    let n = graph.vertex_count();
    let mut var_adj: Vec<BTreeSet<usize>> = (0..n).map(|v| graph.neighbors(v).iter().copied().collect()).collect();
    let mut elem_adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut eliminated = vec![false; n];
    let mut degree: Vec<usize> = (0..n).map(|v| var_adj[v].len()).collect();
    let mut heap: BTreeSet<(usize, usize, usize)> = (0..n).filter(|&v| !halo[v]).map(|v| (degree[v], labels[v], v)).collect();
    let mut order = Vec::with_capacity(n);
    let mut mark = vec![usize::MAX; n];

    while let Some((_, _, v)) = heap.pop_first() {
        order.push(v);
        eliminated[v] = true;
        // reach set of v, which becomes the new element's member list
        mark[v] = v;
        let mut reach = Vec::new();
        for &u in &var_adj[v] {
            if mark[u] != v {
                mark[u] = v;
                reach.push(u);
            }
        }
        let absorbed: Vec<usize> = elem_adj[v].iter().copied().collect();
        for &e in &absorbed {
            for &u in &members[e] {
                if !eliminated[u] && mark[u] != v {
                    mark[u] = v;
                    reach.push(u);
                }
            }
        }
        for &e in &absorbed {
            for u in std::mem::take(&mut members[e]) {
                elem_adj[u].remove(&e);
            }
        }
        for &u in &reach {
            var_adj[u].remove(&v);
            // variable edges inside the new element are now redundant
            var_adj[u].retain(|&x| mark[x] != v);
            elem_adj[u].insert(v);
        }
        members[v] = reach.clone();
        var_adj[v].clear();
        elem_adj[v].clear();
        for &u in reach.iter().filter(|&&u| !halo[u]) {
            let d = external_degree(u, &var_adj, &elem_adj, &members, &mut mark, n + u);
            if d != degree[u] {
                heap.remove(&(degree[u], labels[u], u));
                degree[u] = d;
                heap.insert((d, labels[u], u));
            }
        }
        // marks of this elimination must not alias later stamps
        for &u in &reach {
            mark[u] = usize::MAX;
        }
        mark[v] = usize::MAX;
    }
    order
}

fn external_degree(
    u: usize,
    var_adj: &[BTreeSet<usize>],
    elem_adj: &[BTreeSet<usize>],
    members: &[Vec<usize>],
    mark: &mut [usize],
    stamp: usize,
) -> usize {
    let mut touched = Vec::new();
    let visit = |x: usize, mark: &mut [usize], touched: &mut Vec<(usize, usize)>| -> bool {
        if x == u || mark[x] == stamp {
            return false;
        }
        touched.push((x, mark[x]));
        mark[x] = stamp;
        true
    };
    let mut d = 0;
    for &x in &var_adj[u] {
        if visit(x, mark, &mut touched) {
            d += 1;
        }
    }
    for &e in &elem_adj[u] {
        for &x in &members[e] {
            if visit(x, mark, &mut touched) {
                d += 1;
            }
        }
    }
    for (x, old) in touched.into_iter().rev() {
        mark[x] = old;
    }
    d
}
