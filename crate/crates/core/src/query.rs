//! Query-time graph assembly and the end-to-end solve.
//!
//! The query graph keeps the start and target clusters intact, keeps only the
//! boundary vertices of every other cluster, drops those clusters' internal
//! edges, and adds their super-edges in place.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::apex_search::{search, EdgeKind, EdgeOrigin, GenEdge, GenGraph, SearchOptions, SearchStats};
use crate::clustering::{ClusterError, ClusterSet};
use crate::cost::{CostVec, EdgeId, Eps, VertexId};
use crate::graph_io::{fingerprint, BiGraph, GraphError, PreprocArtifact};
use crate::oracle::NONE;

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("artifact was built for a different graph or parameters (fingerprint mismatch)")]
    FingerprintMismatch,
    #[error("requested eps {requested} is below the artifact eps {artifact}")]
    EpsBelowArtifact { requested: Eps, artifact: Eps },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(VertexId),
    #[error("super-edge {0} has no stored representative path")]
    MissingPath(u32),
    #[error("super-edge {0} does not join two boundary vertices of its cluster")]
    BadSuperEdge(u32),
    #[error(transparent)]
    Artifact(#[from] GraphError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// Generalized graph for one pair of terminal clusters.
#[derive(Debug, Clone)]
pub struct QueryGraph {
    pub gen: GenGraph,
    /// Compact id to original id.
    pub to_original: Vec<VertexId>,
    /// Original id to compact id, `u32::MAX` when the vertex was removed.
    to_compact: Vec<u32>,
    /// Non-trivial clusters kept intact.
    pub terminal: (Option<u32>, Option<u32>),
}

impl QueryGraph {
    pub fn compact(&self, v: VertexId) -> Option<VertexId> {
        match self.to_compact.get(v.idx()) {
            Some(&c) if c != NONE => Some(VertexId(c)),
            _ => None,
        }
    }

    pub fn original(&self, v: VertexId) -> VertexId {
        self.to_original[v.idx()]
    }

    pub fn vertex_count(&self) -> usize {
        self.gen.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.gen.edge_count()
    }
}

fn boundary_flags(n: usize, clusters: &ClusterSet) -> Vec<bool> {
    let mut b = vec![false; n];
    for c in &clusters.clusters {
        for v in &c.boundary {
            b[v.idx()] = true;
        }
    }
    b
}

fn assemble(
    g: &BiGraph,
    clusters: &ClusterSet,
    is_boundary: &[bool],
    artifact: &PreprocArtifact,
    terminal: (Option<u32>, Option<u32>),
) -> QueryGraph {
    let substituted = |c: Option<u32>| c.is_some() && c != terminal.0 && c != terminal.1;
    let n = g.vertex_count();
    let mut to_compact = vec![NONE; n];
    let mut to_original = Vec::new();
    for v in g.vertices() {
        if is_boundary[v.idx()] || !substituted(clusters.nontrivial_id(v)) {
            to_compact[v.idx()] = to_original.len() as u32;
            to_original.push(v);
        }
    }
    let mut edges = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        let (cs, ct) = (clusters.nontrivial_id(e.source), clusters.nontrivial_id(e.target));
        if cs == ct && substituted(cs) {
            continue;
        }
        edges.push(GenEdge {
            origin: EdgeOrigin::Original(EdgeId::from(i)),
            ..GenEdge::regular(
                VertexId(to_compact[e.source.idx()]),
                VertexId(to_compact[e.target.idx()]),
                e.cost,
            )
        });
    }
    for (k, se) in artifact.super_edges.iter().enumerate() {
        if !substituted(Some(se.cluster)) {
            continue;
        }
        edges.push(GenEdge {
            source: VertexId(to_compact[se.from.idx()]),
            target: VertexId(to_compact[se.to.idx()]),
            c: se.cost,
            c_apex: se.apex,
            kind: EdgeKind::Super,
            origin: EdgeOrigin::Super(k as u32),
        });
    }
    let gen = GenGraph::new(to_original.len(), edges).expect("query graph edges are valid");
    QueryGraph {
        gen,
        to_original,
        to_compact,
        terminal,
    }
}

fn check_artifact(g: &BiGraph, artifact: &PreprocArtifact) -> Result<ClusterSet, QueryError> {
    if fingerprint(g, artifact.delta, artifact.eps) != artifact.fingerprint {
        return Err(QueryError::FingerprintMismatch);
    }
    artifact.validate()?;
    let clusters = ClusterSet::from_records(g, &artifact.clusters)?;
    let is_boundary = boundary_flags(g.vertex_count(), &clusters);
    for (k, se) in artifact.super_edges.iter().enumerate() {
        let inside = |v: VertexId| {
            v.idx() < g.vertex_count() && is_boundary[v.idx()] && clusters.nontrivial_id(v) == Some(se.cluster)
        };
        if !inside(se.from) || !inside(se.to) {
            return Err(QueryError::BadSuperEdge(k as u32));
        }
    }
    Ok(clusters)
}

/// Builds the query graph for `s -> t` after checking the artifact belongs to `g`.
pub fn build_query_graph(
    g: &BiGraph,
    artifact: &PreprocArtifact,
    s: VertexId,
    t: VertexId,
) -> Result<QueryGraph, QueryError> {
    for v in [s, t] {
        if v.idx() >= g.vertex_count() {
            return Err(QueryError::VertexOutOfRange(v));
        }
    }
    let clusters = check_artifact(g, artifact)?;
    let flags = boundary_flags(g.vertex_count(), &clusters);
    Ok(assemble(
        g,
        &clusters,
        &flags,
        artifact,
        (clusters.nontrivial_id(s), clusters.nontrivial_id(t)),
    ))
}

/// Replaces super-edges on a query-graph path by their stored interiors.
pub fn reconstruct_path(qg: &QueryGraph, artifact: &PreprocArtifact, path: &[u32]) -> Result<Vec<EdgeId>, QueryError> {
    let mut out = Vec::with_capacity(path.len());
    for &e in path {
        match qg.gen.edge(e).origin {
            EdgeOrigin::Original(id) => out.push(id),
            EdgeOrigin::Super(k) => {
                let inner = artifact.super_edges[k as usize]
                    .path
                    .as_ref()
                    .ok_or(QueryError::MissingPath(k))?;
                out.extend_from_slice(inner);
            }
            EdgeOrigin::Plain => unreachable!("query graphs only hold original or super edges"),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuerySolution {
    /// Representative cost as accumulated by the search.
    pub cost: CostVec,
    pub apex: CostVec,
    /// Original-graph edges; `None` when the artifact carries no paths.
    pub edges: Option<Vec<EdgeId>>,
}

#[derive(Debug, Clone)]
pub struct QueryResult {
    pub solutions: Vec<QuerySolution>,
    pub stats: SearchStats,
    pub query_vertices: usize,
    pub query_edges: usize,
    pub query_super_edges: usize,
    /// Original ids of expanded vertices, in order; filled when tracing.
    pub expanded: Vec<VertexId>,
}

impl QueryResult {
    pub fn costs(&self) -> Vec<CostVec> {
        self.solutions.iter().map(|s| s.cost).collect()
    }
}

type CacheKey = (Option<u32>, Option<u32>);

/// Answers queries against one graph and its preprocessing artifact, caching
/// query graphs per pair of terminal clusters.
pub struct QueryEngine<'a> {
    g: &'a BiGraph,
    artifact: PreprocArtifact,
    clusters: ClusterSet,
    is_boundary: Vec<bool>,
    has_paths: bool,
    cache: Mutex<HashMap<CacheKey, Arc<QueryGraph>>>,
    cache_limit: usize,
}

impl<'a> QueryEngine<'a> {
    pub fn new(g: &'a BiGraph, artifact: PreprocArtifact) -> Result<Self, QueryError> {
        let clusters = check_artifact(g, &artifact)?;
        let is_boundary = boundary_flags(g.vertex_count(), &clusters);
        let has_paths = artifact.super_edges.iter().all(|e| e.path.is_some());
        Ok(QueryEngine {
            g,
            artifact,
            clusters,
            is_boundary,
            has_paths,
            cache: Mutex::new(HashMap::new()),
            cache_limit: 64,
        })
    }

    pub fn graph(&self) -> &BiGraph {
        self.g
    }

    pub fn artifact(&self) -> &PreprocArtifact {
        &self.artifact
    }

    pub fn clusters(&self) -> &ClusterSet {
        &self.clusters
    }

    pub fn query_graph(&self, s: VertexId, t: VertexId) -> Result<Arc<QueryGraph>, QueryError> {
        for v in [s, t] {
            if v.idx() >= self.g.vertex_count() {
                return Err(QueryError::VertexOutOfRange(v));
            }
        }
        let (a, b) = (self.clusters.nontrivial_id(s), self.clusters.nontrivial_id(t));
        let key = (a.min(b), a.max(b));
        if let Some(qg) = self.cache.lock().unwrap().get(&key) {
            return Ok(qg.clone());
        }
        let qg = Arc::new(assemble(self.g, &self.clusters, &self.is_boundary, &self.artifact, key));
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= self.cache_limit {
            cache.clear();
        }
        Ok(cache.entry(key).or_insert(qg).clone())
    }

    /// Runs GA*pex (or its partial-expansion variant, per `opts.mode`) on the
    /// query graph. `eps` must be at least the artifact's.
    pub fn solve(&self, s: VertexId, t: VertexId, eps: Eps, opts: SearchOptions) -> Result<QueryResult, QueryError> {
        if !eps.covers(self.artifact.eps) {
            return Err(QueryError::EpsBelowArtifact {
                requested: eps,
                artifact: self.artifact.eps,
            });
        }
        let qg = self.query_graph(s, t)?;
        let (cs, ct) = (
            qg.compact(s).expect("terminals are kept"),
            qg.compact(t).expect("terminals are kept"),
        );
        let out = search(&qg.gen, cs, ct, eps, opts);
        let mut solutions = Vec::with_capacity(out.solutions.len());
        for sol in &out.solutions {
            let edges = if self.has_paths {
                Some(reconstruct_path(&qg, &self.artifact, &sol.edges)?)
            } else {
                None
            };
            solutions.push(QuerySolution {
                cost: sol.cost,
                apex: sol.apex,
                edges,
            });
        }
        let expanded = out.stats.trace.iter().map(|e| qg.original(e.vertex)).collect();
        Ok(QueryResult {
            solutions,
            stats: out.stats,
            query_vertices: qg.vertex_count(),
            query_edges: qg.edge_count(),
            query_super_edges: qg.gen.super_edge_count(),
            expanded,
        })
    }

    /// True when `v` lies inside a non-terminal cluster's interior for this query.
    pub fn is_hidden(&self, v: VertexId, s: VertexId, t: VertexId) -> bool {
        match self.clusters.nontrivial_id(v) {
            Some(c) => {
                !self.is_boundary[v.idx()]
                    && Some(c) != self.clusters.nontrivial_id(s)
                    && Some(c) != self.clusters.nontrivial_id(t)
            }
            None => false,
        }
    }
}

/// One-off solve; builds a fresh engine.
pub fn solve(
    g: &BiGraph,
    artifact: &PreprocArtifact,
    s: VertexId,
    t: VertexId,
    eps: Eps,
    opts: SearchOptions,
) -> Result<QueryResult, QueryError> {
    QueryEngine::new(g, artifact.clone())?.solve(s, t, eps, opts)
}
