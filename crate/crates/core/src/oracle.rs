//! Exact reference solvers: scalar and lexicographic Dijkstra, and a
//! BOA*-style exact Pareto search.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::cost::{CostVec, EdgeId, Objective, VertexId};
use crate::graph_io::BiGraph;

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    /// Follows edges backwards, i.e. distances *to* the root.
    Reverse,
}

/// Anything Dijkstra can walk: a vertex count and, per vertex, arcs in
/// either direction as `(other endpoint, edge index, cost)`.
pub(crate) trait ArcSource {
    fn vertex_count(&self) -> usize;
    fn for_each_arc(&self, v: usize, dir: Direction, f: impl FnMut(usize, u32, CostVec));
}

impl ArcSource for BiGraph {
    fn vertex_count(&self) -> usize {
        BiGraph::vertex_count(self)
    }

    fn for_each_arc(&self, v: usize, dir: Direction, mut f: impl FnMut(usize, u32, CostVec)) {
        let v = VertexId(v as u32);
        match dir {
            Direction::Forward => {
                for &e in self.out_edges(v) {
                    let edge = self.edge(e);
                    f(edge.target.idx(), e.0, edge.cost);
                }
            }
            Direction::Reverse => {
                for &e in self.in_edges(v) {
                    let edge = self.edge(e);
                    f(edge.source.idx(), e.0, edge.cost);
                }
            }
        }
    }
}

/// Min-heap key: lexicographic `(a, b)`, then insertion order.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LexKey {
    pub a: f64,
    pub b: f64,
    pub seq: u64,
}

impl PartialEq for LexKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for LexKey {}

impl PartialOrd for LexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.a
            .total_cmp(&other.a)
            .then_with(|| self.b.total_cmp(&other.b))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

/// Single-objective distances from (or, in reverse, to) one root.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDistances {
    pub root: VertexId,
    pub objective: Objective,
    pub direction: Direction,
    /// `f64::INFINITY` for unreachable vertices.
    pub dist: Vec<f64>,
}

impl ScalarDistances {
    pub fn get(&self, v: VertexId) -> f64 {
        self.dist[v.idx()]
    }
}

/// Shortest-path tree under lexicographic `(primary, other)` order.
#[derive(Debug, Clone)]
pub(crate) struct LexTree {
    pub direction: Direction,
    /// Full cost vector of the lexicographically best path per vertex.
    pub cost: Vec<CostVec>,
    /// Tree edge at each vertex: the last edge of its path (forward), or the
    /// first edge of its path to the root (reverse). `NONE` at the root and
    /// at unreachable vertices.
    pub pred: Vec<u32>,
    pub other_end: Vec<u32>,
}

impl LexTree {
    pub fn reached(&self, v: usize) -> bool {
        self.cost[v].c1.is_finite()
    }

    /// Edge sequence of the tree path between the root and `v`, in travel order.
    pub fn path(&self, v: usize) -> Vec<u32> {
        let mut out = Vec::new();
        let mut cur = v;
        while self.pred[cur] != NONE {
            out.push(self.pred[cur]);
            cur = self.other_end[cur] as usize;
        }
        if self.direction == Direction::Forward {
            out.reverse();
        }
        out
    }
}

pub(crate) fn lex_dijkstra<G: ArcSource>(
    g: &G,
    root: usize,
    primary: Objective,
    direction: Direction,
    restrict: Option<&[bool]>,
) -> LexTree {
    let n = g.vertex_count();
    let mut cost = vec![CostVec::INFINITY; n];
    let mut pred = vec![NONE; n];
    let mut other_end = vec![NONE; n];
    let mut done = vec![false; n];
    let allowed = |v: usize| restrict.is_none_or(|r| r[v]);
    let key = |c: CostVec| (c.get(primary), c.get(primary.other()));

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    if allowed(root) {
        cost[root] = CostVec::ZERO;
        heap.push(Reverse((LexKey { a: 0.0, b: 0.0, seq }, root)));
    }
    while let Some(Reverse((_, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        let cu = cost[u];
        g.for_each_arc(u, direction, |v, e, c| {
            if done[v] || !allowed(v) {
                return;
            }
            let cand = cu + c;
            let (a, b) = key(cand);
            let (a0, b0) = key(cost[v]);
            if a < a0 || (a == a0 && b < b0) {
                cost[v] = cand;
                pred[v] = e;
                other_end[v] = u as u32;
                seq += 1;
                heap.push(Reverse((LexKey { a, b, seq }, v)));
            }
        });
    }
    LexTree {
        direction,
        cost,
        pred,
        other_end,
    }
}

/// Single-objective Dijkstra. `restrict`, when given, masks the usable vertices
/// and must contain `source`.
pub fn dijkstra(
    g: &BiGraph,
    source: VertexId,
    objective: Objective,
    direction: Direction,
    restrict: Option<&[bool]>,
) -> ScalarDistances {
    let tree = lex_dijkstra(g, source.idx(), objective, direction, restrict);
    ScalarDistances {
        root: source,
        objective,
        direction,
        dist: tree.cost.iter().map(|c| c.get(objective)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPath {
    pub cost: CostVec,
    pub edges: Vec<EdgeId>,
}

/// Pareto frontier with one witness path per cost, sorted by `(c1, c2)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrontierSet {
    pub paths: Vec<FrontierPath>,
}

impl FrontierSet {
    pub fn costs(&self) -> Vec<CostVec> {
        self.paths.iter().map(|p| p.cost).collect()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Complete Pareto frontier of `s -> t` paths.
///
/// Lexicographic best-first search with per-vertex minimum-`g2` pruning and a
/// target-side bound, guided by the ideal-point heuristic.
pub fn exact_pareto(g: &BiGraph, s: VertexId, t: VertexId, restrict: Option<&[bool]>) -> FrontierSet {
    let n = g.vertex_count();
    let allowed = |v: usize| restrict.is_none_or(|r| r[v]);
    if !allowed(s.idx()) || !allowed(t.idx()) {
        return FrontierSet::default();
    }
    let h1 = lex_dijkstra(g, t.idx(), Objective::First, Direction::Reverse, restrict);
    let h2 = lex_dijkstra(g, t.idx(), Objective::Second, Direction::Reverse, restrict);
    let h: Vec<CostVec> = (0..n)
        .map(|v| CostVec {
            c1: h1.cost[v].c1,
            c2: h2.cost[v].c2,
        })
        .collect();
    if !h[s.idx()].is_finite() {
        return FrontierSet::default();
    }

    struct Label {
        vertex: u32,
        g: CostVec,
        parent: u32,
        edge: u32,
    }
    let mut labels = vec![Label {
        vertex: s.0,
        g: CostVec::ZERO,
        parent: NONE,
        edge: NONE,
    }];
    let mut g2_min = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    let f0 = h[s.idx()];
    heap.push(Reverse((
        LexKey {
            a: f0.c1,
            b: f0.c2,
            seq: 0,
        },
        0u32,
    )));
    let mut seq = 0u64;
    let mut out = Vec::new();

    while let Some(Reverse((key, id))) = heap.pop() {
        let (v, gv) = (labels[id as usize].vertex as usize, labels[id as usize].g);
        if gv.c2 >= g2_min[v] || key.b >= g2_min[t.idx()] {
            continue;
        }
        g2_min[v] = gv.c2;
        if v == t.idx() {
            let mut edges = Vec::new();
            let mut cur = id;
            while labels[cur as usize].parent != NONE {
                edges.push(EdgeId(labels[cur as usize].edge));
                cur = labels[cur as usize].parent;
            }
            edges.reverse();
            out.push(FrontierPath { cost: gv, edges });
            continue;
        }
        for &e in g.out_edges(VertexId(v as u32)) {
            let edge = g.edge(e);
            let w = edge.target.idx();
            if !allowed(w) || !h[w].is_finite() {
                continue;
            }
            let gw = gv + edge.cost;
            let f = gw + h[w];
            if gw.c2 >= g2_min[w] || f.c2 >= g2_min[t.idx()] {
                continue;
            }
            seq += 1;
            labels.push(Label {
                vertex: w as u32,
                g: gw,
                parent: id,
                edge: e.0,
            });
            heap.push(Reverse((LexKey { a: f.c1, b: f.c2, seq }, (labels.len() - 1) as u32)));
        }
    }
    FrontierSet { paths: out }
}

/// The two lexicographic corner solutions of the `s -> t` frontier.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremePair {
    /// Best in objective 1, ties broken by objective 2: cost `(c1_min, c2_bar)`.
    pub obj1: FrontierPath,
    /// Best in objective 2, ties broken by objective 1: cost `(c1_bar, c2_min)`.
    pub obj2: FrontierPath,
}

impl ExtremePair {
    /// `(c1_min, c2_min)`, a lower bound on every `s -> t` path.
    pub fn ideal(&self) -> CostVec {
        self.obj1.cost.min(self.obj2.cost)
    }
}

/// `None` when `t` is unreachable from `s` inside the restriction.
pub fn extreme_pair(g: &BiGraph, s: VertexId, t: VertexId, restrict: Option<&[bool]>) -> Option<ExtremePair> {
    let corner = |obj| {
        let tree = lex_dijkstra(g, s.idx(), obj, Direction::Forward, restrict);
        tree.reached(t.idx()).then(|| FrontierPath {
            cost: tree.cost[t.idx()],
            edges: tree.path(t.idx()).into_iter().map(EdgeId).collect(),
        })
    };
    Some(ExtremePair {
        obj1: corner(Objective::First)?,
        obj2: corner(Objective::Second)?,
    })
}
