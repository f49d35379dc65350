mod common;

use common::{bfs_dist, grid_edges, is_separator};
use ndorder::dist_graph::{block_owners, DistGraph};
use ndorder::procsim::ProcGroup;
use ndorder::separate::{band_extract, band_refine_multiseq, compute_separator, dist_cost, Balance, SEP};
use ndorder::{gen, Graph, Params};

fn band_on_one_rank(g: &Graph, parts: &[u8], width: Option<usize>) -> ndorder::separate::BandGraph {
    let out = ProcGroup::new(1, 0)
        .run(|c| {
            let f = DistGraph::scatter(g, &vec![0; g.vertex_count()], 1, 0, 0)?;
            band_extract(c, &f, parts, width)
        })
        .unwrap();
    out.into_iter().next().unwrap()
}

#[test]
fn band_of_path_width_one() {
    let g = gen::path(7);
    let parts = [0, 0, 0, SEP, 1, 1, 1];
    let b = band_on_one_rank(&g, &parts, Some(1));
    assert_eq!(b.band_to_global, vec![2, 3, 4]);
    assert_eq!(b.anchor_weights, [2, 2]);
    assert_eq!(b.graph.vwgt[b.anchor(0)], 2);
    assert_eq!(b.graph.neighbors(b.anchor(0)), &[0]);
    assert_eq!(b.graph.neighbors(b.anchor(1)), &[2]);
    b.graph.validate().unwrap();
    assert_eq!(b.parts, vec![0, SEP, 1, 0, 1]);
}

#[test]
fn band_wider_than_graph_keeps_everything() {
    let g = gen::path(7);
    let parts = [0, 0, 0, SEP, 1, 1, 1];
    let b = band_on_one_rank(&g, &parts, Some(10));
    assert_eq!(b.band_count(), 7);
    assert_eq!(b.anchor_weights, [0, 0]);
    let whole = band_on_one_rank(&g, &parts, None);
    assert_eq!(whole.band_count(), 7);
    assert_eq!(whole.anchor_weights, [0, 0]);
}

#[test]
fn band_of_all_separator_graph() {
    let g = gen::grid2d(3);
    let parts = [SEP; 9];
    let b = band_on_one_rank(&g, &parts, Some(3));
    assert_eq!(b.band_count(), 9);
    assert_eq!(b.anchor_weights, [0, 0]);
    assert!(b.graph.neighbors(b.anchor(0)).is_empty());
    assert!(b.graph.neighbors(b.anchor(1)).is_empty());
}

#[test]
fn empty_separator_is_reported() {
    let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
    let out = ProcGroup::new(1, 0)
        .run(|c| {
            let f = DistGraph::scatter(&g, &[0; 4], 1, 0, 0)?;
            Ok(band_extract(c, &f, &[0, 0, 1, 1], Some(3)).is_err())
        })
        .unwrap();
    assert!(out[0]);
}

#[test]
fn band_is_exact_bfs_ball_across_ranks() {
    let g = gen::grid2d(9);
    let parts: Vec<u8> = (0..81).map(|v| match v % 9 { 0..=3 => 0, 4 => SEP, _ => 1 }).collect();
    let sep: Vec<bool> = parts.iter().map(|&p| p == SEP).collect();
    let dist = bfs_dist(&g, &sep);
    for width in 1..=3 {
        for p in [1, 2, 3] {
            let owner = block_owners(81, p);
            let out = ProcGroup::new(p, 0)
                .run(|c| {
                    let f = DistGraph::scatter(&g, &owner, p, c.rank(), 0)?;
                    let mut local: Vec<u8> = (0..f.local_count()).map(|v| parts[f.vnum()[v]]).collect();
                    local.resize(f.local_count() + f.ghost_count(), 0);
                    band_extract(c, &f, &local, Some(width))
                })
                .unwrap();
            let expect: Vec<usize> = (0..81).filter(|&v| dist[v] <= width).collect();
            for b in &out {
                assert_eq!(b.band_to_global, expect);
                assert_eq!(b, &out[0]);
            }
        }
    }
}

/// A 13-vertex staircase separator of the 9x9 grid.
fn zigzag() -> Vec<u8> {
    let cells = [(0, 3), (1, 3), (1, 4), (2, 4), (2, 5), (3, 5), (4, 5), (4, 4), (5, 4), (5, 3), (6, 3), (7, 3), (8, 3)];
    let mut parts = vec![0u8; 81];
    for r in 0..9 {
        let cols: Vec<usize> = cells.iter().filter(|c| c.0 == r).map(|c| c.1).collect();
        let (lo, hi) = (*cols.iter().min().unwrap(), *cols.iter().max().unwrap());
        for c in 0..9 {
            parts[r * 9 + c] = if c < lo { 0 } else if c > hi { 1 } else { SEP };
        }
    }
    parts
}

#[test]
fn zigzag_separator_straightens() {
    let g = gen::grid2d(9);
    let parts = zigzag();
    assert!(is_separator(&g, &parts));
    assert_eq!(parts.iter().filter(|&&p| p == SEP).count(), 13);
    let params = Params::default();
    let owner = block_owners(81, 4);
    let out = ProcGroup::new(4, 7)
        .run(|c| {
            let f = DistGraph::scatter(&g, &owner, 4, c.rank(), 0)?;
            let mut local: Vec<u8> = (0..f.local_count()).map(|v| parts[f.vnum()[v]]).collect();
            let bal = Balance::new(81, params.balance_tol, 1);
            let (_, start) = dist_cost(c, &f, &local, bal)?;
            for _ in 0..3 {
                local = band_refine_multiseq(c, &f, &local, bal, &params)?;
            }
            let (w, end) = dist_cost(c, &f, &local, bal)?;
            assert!(end <= start);
            let all = c.all_gather_words(77, &local.iter().map(|&l| l as u64).collect::<Vec<_>>())?;
            Ok((w, all.concat()))
        })
        .unwrap();
    let (w, labels) = &out[0];
    let labels: Vec<u8> = labels.iter().map(|&l| l as u8).collect();
    assert!(is_separator(&g, &labels));
    assert!(w[2] <= 11, "wsep {}", w[2]);
    assert!((w[0] - w[1]).abs() as f64 / 81.0 <= 0.2);
}

#[test]
fn grid3_pipeline_separator_has_weight_three() {
    let g = Graph::from_edges(9, &grid_edges(3)).unwrap();
    for seed in 0..10 {
        let out = ProcGroup::new(1, seed)
            .run(|c| {
                let f = DistGraph::scatter(&g, &[0; 9], 1, 0, 0)?;
                compute_separator(c, &f, &Params::default())
            })
            .unwrap();
        assert!(is_separator(&g, &out[0]));
        assert_eq!(out[0].iter().filter(|&&p| p == SEP).count(), 3, "seed {seed}");
    }
}

#[test]
fn pipeline_separator_is_valid_on_every_rank_count() {
    let g = gen::grid2d(12);
    for p in 1..=5 {
        let owner = block_owners(144, p);
        let out = ProcGroup::new(p, 3)
            .run(|c| {
                let f = DistGraph::scatter(&g, &owner, p, c.rank(), 0)?;
                let parts = compute_separator(c, &f, &Params::default())?;
                ndorder::separate::check_dist_separator(c, &f, &parts)?;
                Ok(parts)
            })
            .unwrap();
        let labels = out.concat();
        assert!(is_separator(&g, &labels));
        let sep = labels.iter().filter(|&&l| l == SEP).count();
        assert!(sep <= 16, "p={p} sep={sep}");
    }
}
