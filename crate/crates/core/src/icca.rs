//! Internal cluster cost approximation: super-edges between boundary vertices
//! that ε-approximate every path through a cluster's interior, plus the
//! preprocessing pipeline that produces them.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apex_search::{search_with_heuristic, GenGraph, Heuristic, SearchOptions, EDGE_BOUND_SLACK};
use crate::clustering::{
    delineate_clusters, delineate_clusters_shuffled, pearson, ransac_detect_lines, Cluster, ClusterSet, RansacParams,
};
use crate::cost::{eps_dominates_tol, CostVec, EdgeId, Eps, Objective, VertexId};
use crate::graph_io::{fingerprint, normalize_costs, BiGraph, Edge, GraphError, PreprocArtifact};
use crate::oracle::{lex_dijkstra, Direction, LexTree};

/// Apex-edge pair standing in for paths from `from` to `to` inside one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperEdge {
    pub cluster: u32,
    pub from: VertexId,
    pub to: VertexId,
    /// Representative cost.
    pub cost: CostVec,
    /// Lower bound, component-wise `<= cost`.
    pub apex: CostVec,
    /// Representative path as original edge ids, when kept.
    pub path: Option<Vec<EdgeId>>,
}

impl SuperEdge {
    /// `apex <= cost <= (1 + eps) * apex`, allowing a 1e-9 relative slack on the upper bound.
    pub fn is_eps_bounded(&self, eps: Eps) -> bool {
        self.apex.le(self.cost) && eps_dominates_tol(self.cost, self.apex, eps, EDGE_BOUND_SLACK)
    }
}

/// How a boundary pair was handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IccaRoute {
    Unreachable,
    /// The objective-1-optimal path covers the pair on its own.
    FastObj1,
    /// The objective-2-optimal path covers the pair on its own.
    FastObj2,
    Fallback,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IccaStats {
    pub pairs: u64,
    pub unreachable: u64,
    pub fast_obj1: u64,
    pub fast_obj2: u64,
    pub fallback: u64,
    pub super_edges: u64,
}

impl IccaStats {
    fn record(&mut self, route: IccaRoute, emitted: usize) {
        self.pairs += 1;
        self.super_edges += emitted as u64;
        match route {
            IccaRoute::Unreachable => self.unreachable += 1,
            IccaRoute::FastObj1 => self.fast_obj1 += 1,
            IccaRoute::FastObj2 => self.fast_obj2 += 1,
            IccaRoute::Fallback => self.fallback += 1,
        }
    }

    pub fn merge(&mut self, o: &IccaStats) {
        self.pairs += o.pairs;
        self.unreachable += o.unreachable;
        self.fast_obj1 += o.fast_obj1;
        self.fast_obj2 += o.fast_obj2;
        self.fallback += o.fallback;
        self.super_edges += o.super_edges;
    }
}

/// A cluster's induced subgraph with dense local ids.
struct LocalView<'a> {
    g: &'a BiGraph,
    cluster: &'a Cluster,
    local: BiGraph,
    gen: GenGraph,
}

impl<'a> LocalView<'a> {
    fn new(g: &'a BiGraph, cluster: &'a Cluster) -> Self {
        let to_local = |v: VertexId| {
            cluster
                .vertices
                .binary_search(&v)
                .expect("edge endpoint inside cluster") as u32
        };
        let edges = cluster
            .edges
            .iter()
            .map(|&e| {
                let ed = g.edge(e);
                Edge {
                    source: VertexId(to_local(ed.source)),
                    target: VertexId(to_local(ed.target)),
                    cost: ed.cost,
                }
            })
            .collect();
        let local = BiGraph::new(cluster.vertices.len(), edges).expect("induced subgraph is valid");
        let gen = GenGraph::from_bigraph(&local);
        LocalView { g, cluster, local, gen }
    }

    fn local_id(&self, v: VertexId) -> usize {
        self.cluster.vertices.binary_search(&v).expect("vertex inside cluster")
    }

    fn global_path(&self, local_edges: impl IntoIterator<Item = u32>) -> Vec<EdgeId> {
        local_edges
            .into_iter()
            .map(|e| self.cluster.edges[e as usize])
            .collect()
    }

    fn make_edge(&self, from: VertexId, to: VertexId, apex: CostVec, path: Vec<EdgeId>) -> SuperEdge {
        // recompute in travel order so the stored cost matches the path exactly
        let cost = self.g.path_cost(&path);
        SuperEdge {
            cluster: self.cluster.id,
            from,
            to,
            cost,
            apex: apex.min(cost),
            path: Some(path),
        }
    }

    /// Handles every `(source, target)` pair for one target.
    fn towards(&self, target: VertexId, sources: &[VertexId], eps: Eps) -> Vec<(VertexId, IccaRoute, Vec<SuperEdge>)> {
        let t = self.local_id(target);
        let t1: LexTree = lex_dijkstra(&self.local, t, Objective::First, Direction::Reverse, None);
        let t2: LexTree = lex_dijkstra(&self.local, t, Objective::Second, Direction::Reverse, None);
        let mut heuristic: Option<Heuristic> = None;
        let mut out = Vec::with_capacity(sources.len());
        for &src in sources {
            if src == target {
                continue;
            }
            let s = self.local_id(src);
            if !t1.reached(s) {
                out.push((src, IccaRoute::Unreachable, Vec::new()));
                continue;
            }
            let (p1, p2) = (t1.cost[s], t2.cost[s]);
            let ideal = CostVec { c1: p1.c1, c2: p2.c2 };
            if ideal.c2 > 0.0 && p1.c2 <= (1.0 + eps.e2) * ideal.c2 {
                let e = self.make_edge(src, target, ideal, self.global_path(t1.path(s)));
                out.push((src, IccaRoute::FastObj1, vec![e]));
                continue;
            }
            if ideal.c1 > 0.0 && p2.c1 <= (1.0 + eps.e1) * ideal.c1 {
                let e = self.make_edge(src, target, ideal, self.global_path(t2.path(s)));
                out.push((src, IccaRoute::FastObj2, vec![e]));
                continue;
            }
            let h = heuristic.get_or_insert_with(|| {
                Heuristic::from_vec(
                    t1.cost
                        .iter()
                        .zip(&t2.cost)
                        .map(|(a, b)| CostVec { c1: a.c1, c2: b.c2 })
                        .collect(),
                )
            });
            let found = search_with_heuristic(
                &self.gen,
                VertexId(s as u32),
                VertexId(t as u32),
                eps,
                h,
                SearchOptions::plain(),
            );
            let edges = found
                .solutions
                .into_iter()
                .map(|sol| self.make_edge(src, target, sol.apex, self.global_path(sol.edges)))
                .collect();
            out.push((src, IccaRoute::Fallback, edges));
        }
        out
    }
}

/// Super-edges from `bi` to `bj` through `cluster`. Empty when `bj` cannot be
/// reached from `bi` inside the cluster.
pub fn icca_pair(g: &BiGraph, cluster: &Cluster, bi: VertexId, bj: VertexId, eps: Eps) -> (Vec<SuperEdge>, IccaRoute) {
    assert_ne!(bi, bj, "boundary pair must be two distinct vertices");
    let view = LocalView::new(g, cluster);
    let mut res = view.towards(bj, &[bi], eps);
    let (_, route, edges) = res.pop().expect("one source");
    (edges, route)
}

/// Super-edges for every ordered boundary pair of `cluster`, sorted by
/// `(from, to)`. Targets are processed in parallel on the current rayon pool.
pub fn icca_cluster(g: &BiGraph, cluster: &Cluster, eps: Eps) -> (Vec<SuperEdge>, IccaStats) {
    let mut stats = IccaStats::default();
    if cluster.boundary.len() < 2 {
        return (Vec::new(), stats);
    }
    let view = LocalView::new(g, cluster);
    let per_target: Vec<_> = cluster
        .boundary
        .par_iter()
        .map(|&bj| (bj, view.towards(bj, &cluster.boundary, eps)))
        .collect();
    let mut rows = Vec::new();
    for (bj, results) in per_target {
        for (bi, route, edges) in results {
            stats.record(route, edges.len());
            rows.push(((bi, bj), edges));
        }
    }
    rows.sort_by_key(|r| r.0);
    (rows.into_iter().flat_map(|r| r.1).collect(), stats)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocParams {
    /// Conformance threshold in normalized cost space.
    pub delta: f64,
    pub eps: Eps,
    /// `delta` here is ignored in favour of the field above.
    pub ransac: RansacParams,
    pub n_min_vertices: usize,
    /// Store representative paths in the artifact.
    pub keep_paths: bool,
    /// Try cluster seeds in a shuffled order instead of ascending ids.
    #[serde(default)]
    pub shuffle_seeds: Option<u64>,
}

impl PreprocParams {
    pub fn new(delta: f64, eps: Eps) -> Self {
        PreprocParams {
            delta,
            eps,
            ransac: RansacParams::new(delta),
            n_min_vertices: 8,
            keep_paths: true,
            shuffle_seeds: None,
        }
    }
}

/// Size and timing summary of one preprocessing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocReport {
    pub vertices: u64,
    pub edges: u64,
    pub lines: u64,
    pub clusters: u64,
    pub clustered_vertices: u64,
    pub boundary_vertices: u64,
    /// `|V|` minus interior cluster vertices: the query graph size when no
    /// cluster is terminal.
    pub query_vertices: u64,
    pub query_edges: u64,
    pub super_edges: u64,
    pub branching_original: f64,
    pub branching_query: f64,
    /// Over all edges; `None` when a cost column has no variance.
    pub pearson: Option<f64>,
    pub icca: IccaStats,
    pub wall_s: f64,
}

#[derive(Debug, Error)]
pub enum PreprocError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid parameter: {0}")]
    Param(String),
}

pub struct Preprocessed {
    pub artifact: PreprocArtifact,
    pub clusters: ClusterSet,
    pub report: PreprocReport,
}

/// Normalize, detect lines, delineate clusters, and build super-edges.
pub fn preprocess(g: &BiGraph, params: &PreprocParams) -> Result<Preprocessed, PreprocError> {
    let start = Instant::now();
    if !(params.delta >= 0.0 && params.delta.is_finite()) {
        return Err(PreprocError::Param(format!(
            "delta must be finite and >= 0, got {}",
            params.delta
        )));
    }
    if params.ransac.n_hypotheses == 0 || params.ransac.max_rounds == 0 {
        return Err(PreprocError::Param("RANSAC counts must be positive".into()));
    }
    let (gn, _) = normalize_costs(g)?;
    let ransac = RansacParams {
        delta: params.delta,
        ..params.ransac
    };
    let lines = ransac_detect_lines(&gn, &ransac);
    let n_min = params.n_min_vertices.max(1);
    let clusters = match params.shuffle_seeds {
        Some(seed) => delineate_clusters_shuffled(&gn, &lines, params.delta, n_min, seed),
        None => delineate_clusters(&gn, &lines, params.delta, n_min),
    };

    let mut super_edges = Vec::new();
    let mut icca = IccaStats::default();
    for c in &clusters.clusters {
        let (mut edges, st) = icca_cluster(g, c, params.eps);
        icca.merge(&st);
        if !params.keep_paths {
            for e in &mut edges {
                e.path = None;
            }
        }
        super_edges.extend(edges);
    }

    let mut artifact = PreprocArtifact::empty(fingerprint(g, params.delta, params.eps), params.delta, params.eps);
    artifact.lines = lines;
    artifact.clusters = clusters.records();
    artifact.super_edges = super_edges;
    artifact.validate()?;

    let interior_vertices = clusters.interior_vertex_count() as u64;
    let interior_edges: u64 = clusters.clusters.iter().map(|c| c.edges.len() as u64).sum();
    let (n, m) = (g.vertex_count() as u64, g.edge_count() as u64);
    let query_vertices = n - interior_vertices;
    let query_edges = m - interior_edges + artifact.super_edges.len() as u64;
    let costs: Vec<CostVec> = g.edges().iter().map(|e| e.cost).collect();
    let report = PreprocReport {
        vertices: n,
        edges: m,
        lines: artifact.lines.len() as u64,
        clusters: clusters.clusters.len() as u64,
        clustered_vertices: clusters.clusters.iter().map(|c| c.vertices.len() as u64).sum(),
        boundary_vertices: clusters.clusters.iter().map(|c| c.boundary.len() as u64).sum(),
        query_vertices,
        query_edges,
        super_edges: artifact.super_edges.len() as u64,
        branching_original: g.branching_factor(),
        branching_query: if query_vertices == 0 {
            0.0
        } else {
            query_edges as f64 / query_vertices as f64
        },
        pearson: pearson(&costs).ok(),
        icca,
        wall_s: start.elapsed().as_secs_f64(),
    };
    Ok(Preprocessed {
        artifact,
        clusters,
        report,
    })
}
