//! Graph and permutation file formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::order::InvPerm;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} '{tok}'")))
}

/// Reads a Chaco/METIS graph file.
///
/// The header is `<vertices> <edges> [fmt [ncon]]`; `fmt` digits enable vertex
/// sizes (ignored), vertex weights and edge weights. Neighbors are 1-based.
/// The edge count may give undirected edges or arcs.
pub fn read_chaco(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.starts_with('%'));
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| parse_err(1, "missing header"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() < 2 || head.len() > 4 {
        return Err(parse_err(hline, "header must be '<vertices> <edges> [fmt [ncon]]'"));
    }
    let n: usize = parse_num(head[0], hline, "vertex count")?;
    let m: usize = parse_num(head[1], hline, "edge count")?;
    let fmt = head.get(2).copied().unwrap_or("0");
    if fmt.len() > 3 || !fmt.chars().all(|c| c == '0' || c == '1') {
        return Err(parse_err(hline, format!("bad format code '{fmt}'")));
    }
    let fmt = format!("{fmt:0>3}");
    let flag = |i: usize| fmt.as_bytes()[i] == b'1';
    let (has_size, has_vwgt, has_ewgt) = (flag(0), flag(1), flag(2));
    let ncon: usize = match head.get(3) {
        Some(t) => parse_num(t, hline, "constraint count")?,
        None => 1,
    };
    if ncon != 1 && has_vwgt {
        return Err(parse_err(hline, "only one vertex weight per vertex is supported"));
    }

    let mut g = Graph { xadj: vec![0], ..Default::default() };
    let mut line_of = Vec::with_capacity(n);
    for v in 0..n {
        // blank lines are vertices without neighbors
        let (lno, l) = lines.next().ok_or_else(|| parse_err(0, format!("expected {n} vertex lines, found {v}")))?;
        line_of.push(lno);
        let mut toks = l.split_whitespace();
        let mut next = |what: &str| -> Result<Option<i64>> {
            toks.next().map(|t| parse_num::<i64>(t, lno, what)).transpose()
        };
        if has_size {
            next("vertex size")?.ok_or_else(|| parse_err(lno, "missing vertex size"))?;
        }
        let w = if has_vwgt {
            next("vertex weight")?.ok_or_else(|| parse_err(lno, "missing vertex weight"))?
        } else {
            1
        };
        if w < 1 {
            return Err(parse_err(lno, format!("vertex weight {w} must be positive")));
        }
        g.vwgt.push(w);
        while let Some(u) = next("neighbor")? {
            if u < 1 || u as usize > n {
                return Err(parse_err(lno, format!("neighbor {u} out of range 1..={n}")));
            }
            let u = u as usize - 1;
            if u == v {
                return Err(parse_err(lno, format!("self-loop on vertex {}", v + 1)));
            }
            let ew = if has_ewgt {
                next("edge weight")?.ok_or_else(|| parse_err(lno, "missing edge weight"))?
            } else {
                1
            };
            if ew < 1 {
                return Err(parse_err(lno, format!("edge weight {ew} must be positive")));
            }
            g.adjncy.push(u);
            g.ewgt.push(ew);
        }
        g.xadj.push(g.adjncy.len());
    }
    if let Some((lno, l)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(parse_err(lno, format!("unexpected content after {n} vertex lines: '{l}'")));
    }
    let mut seen: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for v in 0..n {
        for (&u, &w) in g.neighbors(v).iter().zip(g.edge_weights(v)) {
            if seen.insert((v, u), w).is_some() {
                return Err(parse_err(line_of[v], format!("duplicate neighbor {}", u + 1)));
            }
        }
    }
    for (&(v, u), &w) in &seen {
        match seen.get(&(u, v)) {
            None => {
                return Err(Error::InvalidGraph(format!(
                    "asymmetric adjacency: {} lists {} but not conversely",
                    v + 1,
                    u + 1
                )))
            }
            Some(&w2) if w2 != w => {
                return Err(Error::InvalidGraph(format!(
                    "edge {}-{} has weights {w} and {w2}",
                    v + 1,
                    u + 1
                )))
            }
            _ => {}
        }
    }
    let arcs = g.adjncy.len();
    if 2 * m != arcs && m != arcs {
        return Err(parse_err(hline, format!("header declares {m} edges but adjacency lists hold {arcs} arcs")));
    }
    g.validate()?;
    Ok(g)
}

/// Writes a graph in Chaco/METIS format with 1-based neighbors.
pub fn write_chaco(graph: &Graph) -> String {
    let has_vwgt = graph.vwgt.iter().any(|&w| w != 1);
    let has_ewgt = graph.ewgt.iter().any(|&w| w != 1);
    let mut out = format!("{} {}", graph.vertex_count(), graph.edge_count());
    match (has_vwgt, has_ewgt) {
        (false, false) => {}
        (true, false) => out.push_str(" 10"),
        (false, true) => out.push_str(" 1"),
        (true, true) => out.push_str(" 11"),
    }
    out.push('\n');
    for v in 0..graph.vertex_count() {
        let mut toks = Vec::new();
        if has_vwgt {
            toks.push(graph.vwgt[v].to_string());
        }
        for (&u, &w) in graph.neighbors(v).iter().zip(graph.edge_weights(v)) {
            toks.push((u + 1).to_string());
            if has_ewgt {
                toks.push(w.to_string());
            }
        }
        out.push_str(&toks.join(" "));
        out.push('\n');
    }
    out
}

/// Reads the sparsity pattern of a square Matrix Market coordinate matrix as
/// a graph: the diagonal is dropped and the pattern symmetrized.
pub fn read_matrix_market(text: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let banner: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if banner.len() < 5 || banner[0] != "%%matrixmarket" || banner[1] != "matrix" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if banner[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", banner[2])));
    }
    let values_per_entry = match banner[3].as_str() {
        "pattern" => 0,
        "real" | "integer" => 1,
        "complex" => 2,
        f => return Err(parse_err(1, format!("unsupported field '{f}'"))),
    };
    let mut lines = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (slno, size) = lines.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let size: Vec<&str> = size.split_whitespace().collect();
    if size.len() != 3 {
        return Err(parse_err(slno, "size line must be '<rows> <cols> <entries>'"));
    }
    let rows: usize = parse_num(size[0], slno, "row count")?;
    let cols: usize = parse_num(size[1], slno, "column count")?;
    let nnz: usize = parse_num(size[2], slno, "entry count")?;
    if rows != cols {
        return Err(Error::InvalidGraph(format!("matrix is {rows}x{cols}, not square")));
    }
    let mut edges = Vec::new();
    let mut count = 0;
    for (lno, l) in lines {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 + values_per_entry {
            return Err(parse_err(lno, format!("expected {} fields", 2 + values_per_entry)));
        }
        let i: usize = parse_num(toks[0], lno, "row index")?;
        let j: usize = parse_num(toks[1], lno, "column index")?;
        if i < 1 || i > rows || j < 1 || j > cols {
            return Err(parse_err(lno, format!("entry ({i}, {j}) outside {rows}x{cols}")));
        }
        for t in &toks[2..] {
            parse_num::<f64>(t, lno, "value")?;
        }
        count += 1;
        if i != j {
            edges.push((i - 1, j - 1));
        }
    }
    if count != nnz {
        return Err(parse_err(slno, format!("size line declares {nnz} entries, found {count}")));
    }
    Graph::from_edges(rows, &edges)
}

/// Writes the graph as a symmetric pattern matrix (lower triangle, no diagonal).
pub fn write_matrix_market(graph: &Graph) -> String {
    let edges = graph.edge_list();
    let n = graph.vertex_count();
    let mut out = format!("%%MatrixMarket matrix coordinate pattern symmetric\n{n} {n} {}\n", edges.len());
    for (u, v) in edges {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let _ = writeln!(out, "{} {}", hi + 1, lo + 1);
    }
    out
}

/// Reads a graph, choosing the format from a Matrix Market banner.
pub fn read_graph(text: &str) -> Result<Graph> {
    if text.trim_start().to_ascii_lowercase().starts_with("%%matrixmarket") {
        read_matrix_market(text)
    } else {
        read_chaco(text)
    }
}

/// Writes an inverse permutation, one 0-based vertex index per line, after
/// `#`-prefixed header lines.
pub fn write_perm(perm: &InvPerm, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        for l in h.lines() {
            let _ = writeln!(out, "# {l}");
        }
    }
    for v in perm.as_slice() {
        let _ = writeln!(out, "{v}");
    }
    out
}

/// Reads a permutation file written by [`write_perm`].
pub fn read_perm(text: &str) -> Result<InvPerm> {
    let mut order = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        order.push(parse_num::<usize>(l, i + 1, "vertex index")?);
    }
    InvPerm::new(order)
}
