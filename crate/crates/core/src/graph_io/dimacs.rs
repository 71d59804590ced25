use std::io::BufRead;

use super::{BiGraph, Edge, GraphError};
use crate::cost::{CostVec, VertexId};

/// One parsed `.gr` file: header counts plus arcs with 0-based endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct DimacsArcs {
    pub n: usize,
    pub m: usize,
    pub arcs: Vec<(u32, u32, u64)>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

/// Parses a DIMACS shortest-path `.gr` stream.
///
/// Accepts `c` comment lines, exactly one `p sp <n> <m>` header before any arc,
/// and `a <u> <v> <w>` arcs with 1-based ids and non-negative integer weights.
pub fn parse_dimacs<R: BufRead>(r: R) -> Result<DimacsArcs, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut arcs = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let ln = i + 1;
        let mut f = line.split_whitespace();
        match f.next() {
            None | Some("c") => continue,
            Some("p") => {
                if header.is_some() {
                    return Err(parse_err(ln, "duplicate problem line"));
                }
                if f.next() != Some("sp") {
                    return Err(parse_err(ln, "expected `p sp <n> <m>`"));
                }
                let n = f.next().and_then(|s| s.parse().ok());
                let m = f.next().and_then(|s| s.parse().ok());
                match (n, m) {
                    (Some(n), Some(m)) => {
                        header = Some((n, m));
                        arcs.reserve(m);
                    }
                    _ => return Err(parse_err(ln, "expected `p sp <n> <m>`")),
                }
            }
            Some("a") => {
                let (n, _) = header.ok_or_else(|| parse_err(ln, "arc before problem line"))?;
                let fields: Vec<&str> = f.collect();
                if fields.len() != 3 {
                    return Err(parse_err(ln, "expected `a <u> <v> <w>`"));
                }
                let mut ends = [0u32; 2];
                for (k, s) in fields[..2].iter().enumerate() {
                    let id: u64 = s.parse().map_err(|_| parse_err(ln, format!("bad vertex id `{s}`")))?;
                    if id == 0 || id > n as u64 {
                        return Err(GraphError::VertexOutOfRange { vertex: id, n });
                    }
                    ends[k] = (id - 1) as u32;
                }
                let w = fields[2];
                if w.starts_with('-') {
                    return Err(parse_err(ln, format!("negative weight `{w}`")));
                }
                let w: u64 = w.parse().map_err(|_| parse_err(ln, format!("bad weight `{w}`")))?;
                arcs.push((ends[0], ends[1], w));
            }
            Some(tok) => return Err(parse_err(ln, format!("unknown line type `{tok}`"))),
        }
    }
    let (n, m) = header.ok_or_else(|| parse_err(0, "missing problem line"))?;
    if arcs.len() != m {
        return Err(GraphError::ArcCount {
            expected: m,
            found: arcs.len(),
        });
    }
    Ok(DimacsArcs { n, m, arcs })
}

/// Zips two `.gr` files describing the same arcs with different weights.
///
/// Arc `k` gets cost `(w1[k], w2[k])`; the endpoints must agree position by position.
pub fn load_dimacs_pair<R1: BufRead, R2: BufRead>(first: R1, second: R2) -> Result<BiGraph, GraphError> {
    let a = parse_dimacs(first)?;
    let b = parse_dimacs(second)?;
    if a.n != b.n || a.m != b.m {
        return Err(GraphError::HeaderMismatch {
            n1: a.n,
            m1: a.m,
            n2: b.n,
            m2: b.m,
        });
    }
    let mut edges = Vec::with_capacity(a.m);
    for (index, (&(u1, v1, w1), &(u2, v2, w2))) in a.arcs.iter().zip(&b.arcs).enumerate() {
        if u1 != u2 || v1 != v2 {
            return Err(GraphError::ArcMismatch { index, u1, v1, u2, v2 });
        }
        edges.push(Edge {
            source: VertexId(u1),
            target: VertexId(v1),
            cost: CostVec {
                c1: w1 as f64,
                c2: w2 as f64,
            },
        });
    }
    BiGraph::new(a.n, edges)
}
