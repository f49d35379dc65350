use std::collections::BTreeMap;

use ndorder::coarsen::match_graph;
use ndorder::dist_graph::{block_owners, DistGraph, FoldTarget};
use ndorder::procsim::ProcGroup;
use ndorder::separate::{band_extract, compute_separator, fm_refine, initial_separator, perturb, Balance, Partition, SEP};
use ndorder::{gen, Graph, InvPerm, OrderNode, Params};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{bfs_dist, canonical_edges, is_separator, random_graph};

pub type Check = Result<(), String>;

fn fail<T>(what: &str, detail: impl std::fmt::Debug) -> Result<T, String> {
    Err(format!("{what}: {detail:?}"))
}

fn small_params() -> Params {
    Params { coarsest_size: 20, nd_cutoff: 16, ..Params::default() }
}

/// Runs `f` on every rank of `p` with the block distribution of `g`.
fn on_ranks<R: Send>(
    g: &Graph,
    p: usize,
    seed: u64,
    f: impl Fn(&ndorder::procsim::Comm, DistGraph) -> ndorder::Result<R> + Sync,
) -> Result<Vec<R>, String> {
    let owner = block_owners(g.vertex_count(), p);
    ProcGroup::new(p, seed)
        .run(|c| {
            let d = DistGraph::scatter(g, &owner, p, c.rank(), 0)?;
            f(c, d)
        })
        .map_err(|e| e.to_string())
}

/// Mates are symmetric, distinct and adjacent.
pub fn matching_is_valid(g: &Graph, p: usize, seed: u64) -> Check {
    let params = small_params();
    let out = on_ranks(g, p, seed, |c, d| {
        let m = match_graph(c, &d, &params)?;
        Ok((d.vnum().to_vec(), (0..d.local_count()).map(|v| d.first_global() + v).collect::<Vec<_>>(), m.mate))
    })?;
    let mut vnum_of = BTreeMap::new();
    let mut mate_of = BTreeMap::new();
    for (vnum, globals, mates) in &out {
        for i in 0..vnum.len() {
            vnum_of.insert(globals[i], vnum[i]);
            mate_of.insert(globals[i], mates[i]);
        }
    }
    for (&v, &m) in &mate_of {
        let Some(u) = m else { continue };
        if u == v || mate_of.get(&u).copied().flatten() != Some(v) {
            return fail("asymmetric mate", (v, u));
        }
        if !g.neighbors(vnum_of[&v]).contains(&vnum_of[&u]) {
            return fail("mate is not a neighbor", (v, u));
        }
    }
    Ok(())
}

/// Labels of the distributed pipeline gathered by original vertex number.
fn pipeline_labels(g: &Graph, p: usize, seed: u64) -> Result<Vec<u8>, String> {
    let params = small_params();
    let out = on_ranks(g, p, seed, |c, d| {
        let parts = compute_separator(c, &d, &params)?;
        Ok((d.vnum().to_vec(), parts))
    })?;
    let mut labels = vec![u8::MAX; g.vertex_count()];
    for (vnum, parts) in out {
        for (v, l) in vnum.into_iter().zip(parts) {
            labels[v] = l;
        }
    }
    Ok(labels)
}

/// Every partition-returning step yields a valid separator, and refinement
/// never raises the cost.
pub fn separators_are_valid(g: &Graph, seed: u64) -> Check {
    let params = small_params();
    for p in [1, 3] {
        let labels = pipeline_labels(g, p, seed)?;
        if !is_separator(g, &labels) {
            return fail("pipeline separator invalid", p);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bal = Balance::of_graph(g, params.balance_tol);
    let init = initial_separator(g, &mut rng, params.tries, bal, &params);
    if !is_separator(g, &init.parts) || Partition::new(g, init.parts.clone()) != init {
        return fail("initial separator invalid", init.weights);
    }
    let pinned = vec![false; g.vertex_count()];
    let shaken = perturb(g, init.clone(), params.perturb_moves, &pinned, &mut rng);
    if !is_separator(g, &shaken.parts) || Partition::new(g, shaken.parts.clone()) != shaken {
        return fail("perturbed separator invalid", shaken.weights);
    }
    for start in [init, shaken, Partition::trivial(g), bfs_split(g)] {
        let before = start.cost(bal);
        let after = fm_refine(g, start, bal, &params);
        if !is_separator(g, &after.parts) || Partition::new(g, after.parts.clone()) != after {
            return fail("refined separator invalid", after.weights);
        }
        if after.cost(bal) > before {
            return fail("refinement raised cost", (before, after.cost(bal)));
        }
    }
    Ok(())
}

/// A crude separator: BFS layers from vertex 0, the middle layer separates.
fn bfs_split(g: &Graph) -> Partition {
    let n = g.vertex_count();
    let mut src = vec![false; n];
    if n > 0 {
        src[0] = true;
    }
    let d = bfs_dist(g, &src);
    let far = d.iter().copied().filter(|&x| x != usize::MAX).max().unwrap_or(0);
    let mid = far / 2;
    let parts = d.iter().map(|&x| if x == usize::MAX || x > mid { 1 } else if x == mid { SEP } else { 0 }).collect();
    Partition::new(g, parts)
}

/// The band holds exactly the vertices within `width` hops of the separator.
pub fn band_is_bfs_ball(g: &Graph, seed: u64) -> Check {
    let labels = pipeline_labels(g, 1, seed)?;
    let sep: Vec<bool> = labels.iter().map(|&l| l == SEP).collect();
    if !sep.contains(&true) {
        return Ok(());
    }
    let dist = bfs_dist(g, &sep);
    for width in 1..=3 {
        for p in [1, 2, 3] {
            let out = on_ranks(g, p, seed, |c, d| {
                let mut local: Vec<u8> = d.vnum().iter().map(|&v| labels[v]).collect();
                local.resize(d.local_count() + d.ghost_count(), 0);
                Ok((band_extract(c, &d, &local, Some(width))?.band_to_global, d.vnum().to_vec(), d.first_global()))
            })?;
            let mut to_vnum = BTreeMap::new();
            for (_, vnum, first) in &out {
                for (i, &v) in vnum.iter().enumerate() {
                    to_vnum.insert(first + i, v);
                }
            }
            let mut got: Vec<usize> = out[0].0.iter().map(|x| to_vnum[x]).collect();
            got.sort_unstable();
            let expect: Vec<usize> = (0..g.vertex_count()).filter(|&v| dist[v] <= width).collect();
            if got != expect || out.iter().any(|o| o.0 != out[0].0) {
                return fail("band differs from BFS ball", (width, p));
            }
        }
    }
    Ok(())
}

/// Folding keeps the edge multiset and balances vertex counts.
pub fn fold_preserves_edges(g: &Graph, seed: u64) -> Check {
    for p in [2, 3] {
        let owner = block_owners(g.vertex_count(), p);
        let before = canonical_edges(&DistGraph::build(g, &owner, p, 0).map_err(|e| e.to_string())?);
        for target in [FoldTarget::First, FoldTarget::Second, FoldTarget::Duplicate] {
            let out = on_ranks(g, p, seed, |c, d| d.fold(c, target))?;
            let first = p.div_ceil(2);
            let halves: Vec<Vec<DistGraph>> = match target {
                FoldTarget::First => vec![out[..first].iter().flatten().cloned().collect()],
                FoldTarget::Second => vec![out[first..].iter().flatten().cloned().collect()],
                FoldTarget::Duplicate => vec![
                    out[..first].iter().flatten().cloned().collect(),
                    out[first..].iter().flatten().cloned().collect(),
                ],
            };
            for half in halves {
                let counts: Vec<usize> = half.iter().map(|h| h.local_count()).collect();
                if counts.iter().max().unwrap_or(&0) - counts.iter().min().unwrap_or(&0) > 1 {
                    return fail("fold unbalanced", counts);
                }
                if canonical_edges(&half) != before {
                    return fail("fold changed edges", (p, target));
                }
            }
        }
    }
    Ok(())
}

/// Every ghost slot receives its owner's value.
pub fn halo_matches_owners(g: &Graph, seed: u64) -> Check {
    for p in [2, 4] {
        let ok = on_ranks(g, p, seed, |c, d| {
            let local: Vec<u64> = d.vnum().iter().map(|&v| 7 * v as u64 + 3).collect();
            let all = d.halo_extend(c, &local)?;
            let mut expect = BTreeMap::new();
            for (r, vals) in c.all_gather_words(0x7001, &d.vnum().iter().map(|&v| v as u64).collect::<Vec<_>>())?.iter().enumerate() {
                let first = d.proc_ranges()[r];
                for (i, &v) in vals.iter().enumerate() {
                    expect.insert(first + i, 7 * v + 3);
                }
            }
            Ok(d.ghost_globals().iter().enumerate().all(|(i, x)| all[d.local_count() + i] == expect[x]))
        })?;
        if ok.contains(&false) {
            return fail("ghost value differs from owner", p);
        }
    }
    Ok(())
}

/// Leaf intervals tile `[0, n)` and every separator takes the top of its
/// dissection's interval.
pub fn tree_tiles(tree: &OrderNode, n: usize) -> Check {
    let mut spans: Vec<(usize, usize)> = tree.fragments().iter().map(|(s, v)| (*s, v.len())).collect();
    spans.sort_unstable();
    let mut at = 0;
    for (s, len) in spans {
        if s != at {
            return fail("fragments do not tile", (s, at));
        }
        at += len;
    }
    if at != n {
        return fail("fragments cover", (at, n));
    }
    separators_last(tree)
}

fn separators_last(node: &OrderNode) -> Check {
    if let OrderNode::Dissection { start, size, part0, part1, sep } = node {
        if let Some(s) = sep {
            if s.start() + s.size() != start + size {
                return fail("separator not at top of interval", (s.start(), start, size));
            }
            for child in [part0, part1].into_iter().flatten() {
                if child.start() + child.size() > s.start() {
                    return fail("part overlaps separator", child.start());
                }
            }
        }
        for child in [part0, part1].into_iter().flatten() {
            separators_last(child)?;
        }
    }
    Ok(())
}

pub fn is_bijection(perm: &InvPerm, n: usize) -> Check {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return fail("permutation length", (perm.len(), n));
    }
    for &v in perm.as_slice() {
        if v >= n || seen[v] {
            return fail("not a bijection at", v);
        }
        seen[v] = true;
    }
    Ok(())
}

/// Ordering trees tile and their permutations are bijections.
pub fn orderings_are_consistent(g: &Graph, seed: u64) -> Check {
    for p in [1, 2, 4] {
        let opts = ndorder::OrderOptions { procs: p, seed, schedule: ndorder::Schedule::Parallel, params: small_params() };
        let (tree, perm) = ndorder::order_graph_tree(g, &opts).map_err(|e| e.to_string())?;
        tree_tiles(&tree, g.vertex_count())?;
        is_bijection(&perm, g.vertex_count())?;
    }
    Ok(())
}

/// All suites on one graph.
pub fn all(g: &Graph, seed: u64) -> Check {
    matching_is_valid(g, 1, seed)?;
    matching_is_valid(g, 3, seed)?;
    separators_are_valid(g, seed)?;
    band_is_bfs_ball(g, seed)?;
    fold_preserves_edges(g, seed)?;
    halo_matches_owners(g, seed)?;
    orderings_are_consistent(g, seed)
}

/// The `i`-th graph of the fixed random corpus: up to 200 vertices.
pub fn corpus_graph(i: u64) -> Graph {
    let n = 1 + (i as usize * 67) % 200;
    random_graph(n, 0.5 + (i % 6) as f64 * 0.5, 1000 + i)
}

pub fn generator_family() -> Vec<(String, Graph)> {
    vec![
        ("grid2d 7".into(), gen::grid2d(7)),
        ("grid3d 4".into(), gen::grid3d(4)),
        ("path 60".into(), gen::path(60)),
        ("star 30".into(), gen::star(30)),
        ("complete 12".into(), gen::complete(12)),
        ("random 150 300".into(), gen::random(150, 300, 5)),
    ]
}
