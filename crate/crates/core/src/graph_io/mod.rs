//! Bi-objective graphs and everything that moves them in or out of memory:
//! DIMACS loading, normalization, synthetic generation, the plain-text graph
//! format and preprocessing artifacts.

mod artifact;
mod dimacs;
mod synthetic;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{CostVec, EdgeId, VertexId};

pub use artifact::{fingerprint, load_artifact, save_artifact, ClusterRecord, PreprocArtifact, ARTIFACT_VERSION};
pub use dimacs::{load_dimacs_pair, parse_dimacs};
pub use synthetic::{generate_synthetic, PlantedTruth, RegionLayout, SyntheticSpec, Topology};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("header mismatch: first file has n={n1} m={m1}, second has n={n2} m={m2}")]
    HeaderMismatch { n1: usize, m1: usize, n2: usize, m2: usize },
    #[error("arc {index} mismatch: ({u1},{v1}) vs ({u2},{v2})")]
    ArcMismatch {
        index: usize,
        u1: u32,
        v1: u32,
        u2: u32,
        v2: u32,
    },
    #[error("expected {expected} arcs, found {found}")]
    ArcCount { expected: usize, found: usize },
    #[error("vertex {vertex} out of range (n={n})")]
    VertexOutOfRange { vertex: u64, n: usize },
    #[error("invalid cost on edge {index}: ({c1}, {c2})")]
    InvalidCost { index: usize, c1: f64, c2: f64 },
    #[error("objective {0} has no positive cost")]
    EmptyObjective(u8),
    #[error("infeasible synthetic spec: {0}")]
    Infeasible(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("artifact version {found}, expected {expected}")]
    ArtifactVersion { found: u32, expected: u32 },
    #[error("artifact invariant violated: {0}")]
    ArtifactInvariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: VertexId,
    pub target: VertexId,
    pub cost: CostVec,
}

/// Directed bi-objective graph with CSR adjacency in both directions.
/// Parallel edges are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct BiGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    out_offsets: Vec<u32>,
    out_edges: Vec<EdgeId>,
    in_offsets: Vec<u32>,
    in_edges: Vec<EdgeId>,
}

fn build_csr(vertex_count: usize, edges: &[Edge], key: impl Fn(&Edge) -> VertexId) -> (Vec<u32>, Vec<EdgeId>) {
    let mut offsets = vec![0u32; vertex_count + 1];
    for e in edges {
        offsets[key(e).idx() + 1] += 1;
    }
    for i in 0..vertex_count {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut list = vec![EdgeId(0); edges.len()];
    for (i, e) in edges.iter().enumerate() {
        let slot = &mut fill[key(e).idx()];
        list[*slot as usize] = EdgeId::from(i);
        *slot += 1;
    }
    (offsets, list)
}

impl BiGraph {
    pub fn new(vertex_count: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        for (i, e) in edges.iter().enumerate() {
            for v in [e.source, e.target] {
                if v.idx() >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: v.0 as u64,
                        n: vertex_count,
                    });
                }
            }
            let c = e.cost;
            if !(c.c1 >= 0.0 && c.c2 >= 0.0 && c.is_finite()) {
                return Err(GraphError::InvalidCost {
                    index: i,
                    c1: c.c1,
                    c2: c.c2,
                });
            }
        }
        let (out_offsets, out_edges) = build_csr(vertex_count, &edges, |e| e.source);
        let (in_offsets, in_edges) = build_csr(vertex_count, &edges, |e| e.target);
        Ok(BiGraph {
            vertex_count,
            edges,
            out_offsets,
            out_edges,
            in_offsets,
            in_edges,
        })
    }

    /// Convenience constructor from `(source, target, c1, c2)` tuples.
    pub fn from_arcs(
        vertex_count: usize,
        arcs: impl IntoIterator<Item = (u32, u32, f64, f64)>,
    ) -> Result<Self, GraphError> {
        let edges = arcs
            .into_iter()
            .map(|(u, v, c1, c2)| Edge {
                source: VertexId(u),
                target: VertexId(v),
                cost: CostVec { c1, c2 },
            })
            .collect();
        BiGraph::new(vertex_count, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.idx()]
    }

    #[inline]
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        let v = v.idx();
        &self.out_edges[self.out_offsets[v] as usize..self.out_offsets[v + 1] as usize]
    }

    #[inline]
    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        let v = v.idx();
        &self.in_edges[self.in_offsets[v] as usize..self.in_offsets[v + 1] as usize]
    }

    /// All in- and out-edges of `v`.
    pub fn incident_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.out_edges(v).iter().chain(self.in_edges(v)).copied()
    }

    /// The endpoint of `e` that is not `v` (or `v` for a self-loop).
    #[inline]
    pub fn opposite(&self, e: EdgeId, v: VertexId) -> VertexId {
        let edge = self.edge(e);
        if edge.source == v {
            edge.target
        } else {
            edge.source
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count as u32).map(VertexId)
    }

    /// Average out-degree `|E| / |V|`.
    pub fn branching_factor(&self) -> f64 {
        if self.vertex_count == 0 {
            0.0
        } else {
            self.edges.len() as f64 / self.vertex_count as f64
        }
    }

    /// Sum of edge costs along an edge sequence, in order.
    pub fn path_cost(&self, path: &[EdgeId]) -> CostVec {
        path.iter().fold(CostVec::ZERO, |acc, &e| acc + self.edge(e).cost)
    }

    /// Vertex sequence of an edge path starting at `start`.
    pub fn path_vertices(&self, start: VertexId, path: &[EdgeId]) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(path.len() + 1);
        out.push(start);
        out.extend(path.iter().map(|&e| self.edge(e).target));
        out
    }

    /// Same topology with every cost replaced by `f(cost)`.
    pub fn map_costs(&self, f: impl Fn(CostVec) -> CostVec) -> BiGraph {
        BiGraph {
            edges: self.edges.iter().map(|e| Edge { cost: f(e.cost), ..*e }).collect(),
            ..self.clone()
        }
    }
}

/// Per-objective maxima used to map costs into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationScales {
    pub max_c1: f64,
    pub max_c2: f64,
}

impl NormalizationScales {
    pub fn normalize(&self, c: CostVec) -> CostVec {
        CostVec {
            c1: c.c1 / self.max_c1,
            c2: c.c2 / self.max_c2,
        }
    }

    pub fn denormalize(&self, c: CostVec) -> CostVec {
        CostVec {
            c1: c.c1 * self.max_c1,
            c2: c.c2 * self.max_c2,
        }
    }
}

/// Divides every cost component by its objective-wide maximum.
pub fn normalize_costs(g: &BiGraph) -> Result<(BiGraph, NormalizationScales), GraphError> {
    let (mut m1, mut m2) = (0.0f64, 0.0f64);
    for e in g.edges() {
        m1 = m1.max(e.cost.c1);
        m2 = m2.max(e.cost.c2);
    }
    if !(m1 > 0.0) {
        return Err(GraphError::EmptyObjective(1));
    }
    if !(m2 > 0.0) {
        return Err(GraphError::EmptyObjective(2));
    }
    let scales = NormalizationScales { max_c1: m1, max_c2: m2 };
    Ok((g.map_costs(|c| scales.normalize(c)), scales))
}

const GRAPH_MAGIC: &str = "bigraph 1";

/// Writes the plain-text graph format:
///
/// ```text
/// bigraph 1
/// <n> <m>
/// <source> <target> <c1> <c2>     (m lines, 0-based ids)
/// ```
///
/// Floats use Rust's shortest round-trip representation, so reading back is exact.
pub fn write_graph<W: Write>(g: &BiGraph, mut w: W) -> Result<(), GraphError> {
    writeln!(w, "{GRAPH_MAGIC}")?;
    writeln!(w, "{} {}", g.vertex_count(), g.edge_count())?;
    for e in g.edges() {
        writeln!(w, "{} {} {:?} {:?}", e.source.0, e.target.0, e.cost.c1, e.cost.c2)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_graph<R: BufRead>(r: R) -> Result<BiGraph, GraphError> {
    let mut lines = r.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String), GraphError> {
        match lines.next() {
            Some((i, l)) => Ok((i + 1, l?)),
            None => Err(GraphError::Parse {
                line: 0,
                msg: format!("unexpected end of input, expected {what}"),
            }),
        }
    };
    let (ln, magic) = next("header")?;
    if magic.trim() != GRAPH_MAGIC {
        return Err(GraphError::Parse {
            line: ln,
            msg: format!("expected `{GRAPH_MAGIC}`"),
        });
    }
    let (ln, counts) = next("counts")?;
    let bad = |line: usize, msg: &str| GraphError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut it = counts.split_whitespace();
    let n: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(ln, "bad vertex count"))?;
    let m: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(ln, "bad edge count"))?;
    let mut arcs = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, l) = next("edge")?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 4 {
            return Err(bad(ln, "expected `source target c1 c2`"));
        }
        let u: u32 = f[0].parse().map_err(|_| bad(ln, "bad source"))?;
        let v: u32 = f[1].parse().map_err(|_| bad(ln, "bad target"))?;
        let c1: f64 = f[2].parse().map_err(|_| bad(ln, "bad c1"))?;
        let c2: f64 = f[3].parse().map_err(|_| bad(ln, "bad c2"))?;
        arcs.push((u, v, c1, c2));
    }
    BiGraph::from_arcs(n, arcs)
}
