//! Edge-list text format: one `u<TAB>v<TAB>w` edge per line, 0-based ids,
//! `#` comment lines ignored, optional `n=<int>` header fixing the vertex
//! count (otherwise inferred as the largest id plus one).

use std::io::{BufRead, Write};

use super::{GraphError, WeightedGraph};

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<WeightedGraph, GraphError> {
    let mut edges = Vec::new();
    let mut explicit_n: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("n=") {
            explicit_n = Some(rest.trim().parse().map_err(|_| GraphError::Parse {
                line: idx + 1,
                message: format!("invalid vertex count `{rest}`"),
            })?);
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let edge = (|| -> Option<(usize, usize, f64)> {
            let u = fields.next()?.parse().ok()?;
            let v = fields.next()?.parse().ok()?;
            let w = fields.next()?.parse().ok()?;
            Some((u, v, w))
        })()
        .ok_or_else(|| GraphError::Parse {
            line: idx + 1,
            message: format!("expected `u<TAB>v<TAB>w`, got `{trimmed}`"),
        })?;
        edges.push(edge);
    }
    match explicit_n {
        Some(n) => WeightedGraph::from_edges_with_n(n, &edges),
        None => WeightedGraph::from_edges(&edges),
    }
}

pub fn write_edge_list<W: Write>(graph: &WeightedGraph, mut out: W) -> Result<(), GraphError> {
    let io_err = |e: std::io::Error| GraphError::Io(e.to_string());
    writeln!(out, "n={}", graph.n()).map_err(io_err)?;
    for &(u, v, w) in graph.edges() {
        writeln!(out, "{u}\t{v}\t{w}").map_err(io_err)?;
    }
    Ok(())
}
