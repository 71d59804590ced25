//! Correlation-line detection and cluster delineation.
//!
//! Lines are fitted by multi-round RANSAC on normalized edge costs. Clusters
//! are grown by DFS from seed vertices whose incident edges all conform to a
//! common line.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{line_through, perp_distance, CostVec, EdgeId, Line2D, VertexId};
use crate::graph_io::{BiGraph, ClusterRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("pearson needs at least two samples")]
    TooFewSamples,
    #[error("zero variance in objective {0}")]
    ZeroVariance(u8),
    #[error("cluster record {0} references a vertex outside the graph")]
    BadRecord(u32),
}

/// Pearson correlation between the two cost components.
pub fn pearson(costs: &[CostVec]) -> Result<f64, ClusterError> {
    if costs.len() < 2 {
        return Err(ClusterError::TooFewSamples);
    }
    let n = costs.len() as f64;
    let m1 = costs.iter().map(|c| c.c1).sum::<f64>() / n;
    let m2 = costs.iter().map(|c| c.c2).sum::<f64>() / n;
    let (mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0);
    for c in costs {
        let (d1, d2) = (c.c1 - m1, c.c2 - m2);
        s11 += d1 * d1;
        s22 += d2 * d2;
        s12 += d1 * d2;
    }
    if s11 == 0.0 {
        return Err(ClusterError::ZeroVariance(1));
    }
    if s22 == 0.0 {
        return Err(ClusterError::ZeroVariance(2));
    }
    Ok((s12 / (s11.sqrt() * s22.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RansacParams {
    /// Inlier threshold in normalized cost space.
    pub delta: f64,
    pub n_hypotheses: usize,
    /// A line needs strictly more inliers than this. `None` means 1% of `|E|`.
    pub n_min_inliers: Option<usize>,
    pub max_rounds: usize,
    pub rng_seed: u64,
}

impl RansacParams {
    pub fn new(delta: f64) -> Self {
        RansacParams {
            delta,
            n_hypotheses: 100,
            n_min_inliers: None,
            max_rounds: 16,
            rng_seed: 0,
        }
    }

    pub fn min_inliers_for(&self, edge_count: usize) -> usize {
        self.n_min_inliers.unwrap_or((edge_count / 100).max(1))
    }
}

fn count_inliers(line: Line2D, pts: &[CostVec], delta: f64) -> usize {
    pts.iter().filter(|&&p| perp_distance(line, p) <= delta).count()
}

/// Detects correlation lines on a graph with normalized costs.
///
/// Each round fits `n_hypotheses` two-point lines with positive slope, keeps the
/// one with the most inliers if it has more than `n_min_inliers`, and removes
/// its inliers. Stops when no line qualifies, fewer than two edges remain, or
/// after `max_rounds` rounds. Lines come out in detection order.
pub fn ransac_detect_lines(g: &BiGraph, p: &RansacParams) -> Vec<Line2D> {
    let min_inliers = p.min_inliers_for(g.edge_count());
    let mut pts: Vec<CostVec> = g.edges().iter().map(|e| e.cost).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(p.rng_seed);
    let mut lines = Vec::new();
    for _ in 0..p.max_rounds {
        if pts.len() < 2 {
            break;
        }
        let mut hyps = Vec::with_capacity(p.n_hypotheses);
        // degenerate pairs are resampled, within a budget
        let budget = p.n_hypotheses.saturating_mul(20);
        for _ in 0..budget {
            if hyps.len() == p.n_hypotheses {
                break;
            }
            let i = rng.gen_range(0..pts.len());
            let j = rng.gen_range(0..pts.len());
            if i == j {
                continue;
            }
            if let Ok(line) = line_through(pts[i], pts[j]) {
                hyps.push(line);
            }
        }
        let best = hyps
            .par_iter()
            .enumerate()
            .map(|(k, &l)| (count_inliers(l, &pts, p.delta), k))
            .reduce(
                || (0, usize::MAX),
                |a, b| {
                    if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                        a
                    } else {
                        b
                    }
                },
            );
        if best.1 == usize::MAX || best.0 <= min_inliers {
            break;
        }
        let line = hyps[best.1];
        pts.retain(|&q| perp_distance(line, q) > p.delta);
        lines.push(line);
    }
    lines
}

/// Indices of the lines `cost` δ-conforms to, in input order.
pub fn conforming_lines(cost: CostVec, lines: &[Line2D], delta: f64) -> Vec<usize> {
    (0..lines.len())
        .filter(|&k| perp_distance(lines[k], cost) <= delta)
        .collect()
}

/// A (δ, ℓ)-correlated cluster. Trivial clusters are not materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: u32,
    pub line: Line2D,
    /// Ascending.
    pub vertices: Vec<VertexId>,
    /// Induced edges, ascending.
    pub edges: Vec<EdgeId>,
    /// Ascending.
    pub boundary: Vec<VertexId>,
}

impl Cluster {
    pub fn record(&self) -> ClusterRecord {
        ClusterRecord {
            id: self.id,
            line: self.line,
            vertices: self.vertices.clone(),
            boundary: self.boundary.clone(),
        }
    }

    /// Vertices that are not on the boundary.
    pub fn interior_count(&self) -> usize {
        self.vertices.len() - self.boundary.len()
    }
}

/// Cluster a vertex belongs to. Every vertex outside the non-trivial
/// clusters forms its own trivial cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClusterRef {
    NonTrivial(u32),
    Trivial(VertexId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    vertex_cluster: Vec<u32>,
}

const UNCLAIMED: u32 = u32::MAX;

impl ClusterSet {
    /// Every vertex in its own trivial cluster.
    pub fn all_trivial(n: usize) -> Self {
        ClusterSet {
            clusters: Vec::new(),
            vertex_cluster: vec![UNCLAIMED; n],
        }
    }

    /// Builds clusters from explicit vertex sets, deriving induced edges and
    /// boundaries from `g`.
    pub fn from_vertex_sets(g: &BiGraph, sets: Vec<(Line2D, Vec<VertexId>)>) -> Self {
        let mut vertex_cluster = vec![UNCLAIMED; g.vertex_count()];
        for (id, (_, vs)) in sets.iter().enumerate() {
            for v in vs {
                vertex_cluster[v.idx()] = id as u32;
            }
        }
        let clusters = sets
            .into_iter()
            .enumerate()
            .map(|(id, (line, mut vertices))| {
                vertices.sort_unstable();
                vertices.dedup();
                finish_cluster(g, &vertex_cluster, id as u32, line, vertices)
            })
            .collect();
        ClusterSet {
            clusters,
            vertex_cluster,
        }
    }

    pub fn from_records(g: &BiGraph, records: &[ClusterRecord]) -> Result<Self, ClusterError> {
        for r in records {
            if r.vertices.iter().any(|v| v.idx() >= g.vertex_count()) {
                return Err(ClusterError::BadRecord(r.id));
            }
        }
        Ok(ClusterSet::from_vertex_sets(
            g,
            records.iter().map(|r| (r.line, r.vertices.clone())).collect(),
        ))
    }

    pub fn cluster_of(&self, v: VertexId) -> ClusterRef {
        match self.vertex_cluster[v.idx()] {
            UNCLAIMED => ClusterRef::Trivial(v),
            c => ClusterRef::NonTrivial(c),
        }
    }

    /// Id of the non-trivial cluster containing `v`, if any.
    pub fn nontrivial_id(&self, v: VertexId) -> Option<u32> {
        match self.vertex_cluster[v.idx()] {
            UNCLAIMED => None,
            c => Some(c),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_cluster.len()
    }

    pub fn trivial_count(&self) -> usize {
        self.vertex_cluster.iter().filter(|&&c| c == UNCLAIMED).count()
    }

    pub fn records(&self) -> Vec<ClusterRecord> {
        self.clusters.iter().map(Cluster::record).collect()
    }

    /// Total number of vertices that are inside a cluster but not on its boundary.
    pub fn interior_vertex_count(&self) -> usize {
        self.clusters.iter().map(Cluster::interior_count).sum()
    }
}

fn finish_cluster(g: &BiGraph, owner: &[u32], id: u32, line: Line2D, vertices: Vec<VertexId>) -> Cluster {
    let mut edges = Vec::new();
    let mut boundary = Vec::new();
    for &v in &vertices {
        let mut outside = false;
        for e in g.incident_edges(v) {
            if owner[g.opposite(e, v).idx()] != id {
                outside = true;
            }
        }
        for &e in g.out_edges(v) {
            if owner[g.edge(e).target.idx()] == id {
                edges.push(e);
            }
        }
        if outside {
            boundary.push(v);
        }
    }
    edges.sort_unstable();
    Cluster {
        id,
        line,
        vertices,
        edges,
        boundary,
    }
}

/// Grows correlated clusters over a graph with normalized costs.
///
/// Seeds are tried in ascending vertex order. The seed's line is the first (in
/// detection order) that all its edges share. Growth admits a vertex when it
/// has at least one incident edge, every incident edge conforms to the line,
/// and none of its neighbours belongs to another cluster.
/// Clusters smaller than `n_min_vertices` are dissolved into trivial ones.
pub fn delineate_clusters(g: &BiGraph, lines: &[Line2D], delta: f64, n_min_vertices: usize) -> ClusterSet {
    delineate_in_order(g, lines, delta, n_min_vertices, g.vertices())
}

/// As [`delineate_clusters`], with seeds tried in an order shuffled by `rng_seed`.
pub fn delineate_clusters_shuffled(
    g: &BiGraph,
    lines: &[Line2D],
    delta: f64,
    n_min_vertices: usize,
    rng_seed: u64,
) -> ClusterSet {
    let mut order: Vec<VertexId> = g.vertices().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));
    delineate_in_order(g, lines, delta, n_min_vertices, order.into_iter())
}

fn delineate_in_order(
    g: &BiGraph,
    lines: &[Line2D],
    delta: f64,
    n_min_vertices: usize,
    seeds: impl Iterator<Item = VertexId>,
) -> ClusterSet {
    let n = g.vertex_count();
    let mut owner = vec![UNCLAIMED; n];
    let mut settled = vec![false; n];
    let mut sets: Vec<(Line2D, Vec<VertexId>)> = Vec::new();
    let conforms = |e: EdgeId, line: Line2D| perp_distance(line, g.edge(e).cost) <= delta;

    // seeds skip the neighbour-ownership test; it only stops growth
    let admissible = |v: VertexId, line: Line2D, owner: &[u32], id: u32, seed: bool| {
        let mut any = false;
        for e in g.incident_edges(v) {
            any = true;
            let o = owner[g.opposite(e, v).idx()];
            if (!seed && o != UNCLAIMED && o != id) || !conforms(e, line) {
                return false;
            }
        }
        any
    };

    let mut stack = Vec::new();
    let mut tried = vec![u32::MAX; n];
    for seed in seeds {
        if settled[seed.idx()] {
            continue;
        }
        let mut common: Option<Vec<usize>> = None;
        for e in g.incident_edges(seed) {
            let here = conforming_lines(g.edge(e).cost, lines, delta);
            common = Some(match common {
                None => here,
                Some(prev) => prev.into_iter().filter(|k| here.contains(k)).collect(),
            });
        }
        let Some(&k) = common.as_ref().and_then(|c| c.first()) else {
            settled[seed.idx()] = true;
            continue;
        };
        let line = lines[k];
        let id = sets.len() as u32;
        if !admissible(seed, line, &owner, id, true) {
            settled[seed.idx()] = true;
            continue;
        }
        let mut members = vec![seed];
        owner[seed.idx()] = id;
        stack.push(seed);
        tried[seed.idx()] = id;
        while let Some(u) = stack.pop() {
            for e in g.incident_edges(u) {
                let w = g.opposite(e, u);
                if owner[w.idx()] != UNCLAIMED || settled[w.idx()] || tried[w.idx()] == id {
                    continue;
                }
                tried[w.idx()] = id;
                if admissible(w, line, &owner, id, false) {
                    owner[w.idx()] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        for &v in &members {
            settled[v.idx()] = true;
        }
        if members.len() < n_min_vertices {
            for &v in &members {
                owner[v.idx()] = UNCLAIMED;
            }
            continue;
        }
        sets.push((line, members));
    }
    ClusterSet::from_vertex_sets(g, sets)
}
