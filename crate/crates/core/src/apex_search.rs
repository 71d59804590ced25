//! A*pex over generalized graphs.
//!
//! Every edge carries a representative cost `c` and an apex cost `c_apex <= c`.
//! Plain graphs are the special case `c_apex == c`, where the search is
//! ordinary A*pex. Super-edges can optionally be expanded lazily, one
//! successor at a time (partial expansion).

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{eps_dominates, eps_dominates_tol, CostVec, EdgeId, Eps, Objective, VertexId};
use crate::graph_io::BiGraph;
use crate::oracle::{lex_dijkstra, ArcSource, Direction, LexKey, NONE};

/// Relative slack allowed when validating that an edge is ε-bounded.
pub const EDGE_BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Regular,
    Super,
}

/// Where a generalized edge came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeOrigin {
    Plain,
    Original(EdgeId),
    /// Index into an artifact's super-edge list.
    Super(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenEdge {
    pub source: VertexId,
    pub target: VertexId,
    pub c: CostVec,
    pub c_apex: CostVec,
    pub kind: EdgeKind,
    pub origin: EdgeOrigin,
}

impl GenEdge {
    /// Trivial apex-edge pair: `c_apex == c`.
    pub fn regular(source: VertexId, target: VertexId, c: CostVec) -> Self {
        GenEdge {
            source,
            target,
            c,
            c_apex: c,
            kind: EdgeKind::Regular,
            origin: EdgeOrigin::Plain,
        }
    }

    pub fn is_eps_bounded(&self, eps: Eps) -> bool {
        self.c_apex.le(self.c) && eps_dominates_tol(self.c, self.c_apex, eps, EDGE_BOUND_SLACK)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenGraphError {
    #[error("edge {edge}: endpoint out of range (n={n})")]
    EndpointOutOfRange { edge: usize, n: usize },
    #[error("edge {edge}: costs must be finite and non-negative")]
    InvalidCost { edge: usize },
    #[error("edge {edge}: apex cost exceeds representative cost")]
    ApexAboveCost { edge: usize },
}

/// Directed graph of apex-edge pairs, with out-lists split by edge kind.
#[derive(Debug, Clone)]
pub struct GenGraph {
    vertex_count: usize,
    edges: Vec<GenEdge>,
    reg_off: Vec<u32>,
    reg: Vec<u32>,
    sup_off: Vec<u32>,
    sup: Vec<u32>,
    in_off: Vec<u32>,
    inc: Vec<u32>,
}

fn csr(n: usize, ids: impl Iterator<Item = (usize, u32)> + Clone) -> (Vec<u32>, Vec<u32>) {
    let mut off = vec![0u32; n + 1];
    for (v, _) in ids.clone() {
        off[v + 1] += 1;
    }
    for i in 0..n {
        off[i + 1] += off[i];
    }
    let mut fill = off.clone();
    let mut out = vec![0u32; off[n] as usize];
    for (v, e) in ids {
        out[fill[v] as usize] = e;
        fill[v] += 1;
    }
    (off, out)
}

impl GenGraph {
    pub fn new(vertex_count: usize, edges: Vec<GenEdge>) -> Result<Self, GenGraphError> {
        for (i, e) in edges.iter().enumerate() {
            if e.source.idx() >= vertex_count || e.target.idx() >= vertex_count {
                return Err(GenGraphError::EndpointOutOfRange {
                    edge: i,
                    n: vertex_count,
                });
            }
            let ok = |c: CostVec| c.is_finite() && c.c1 >= 0.0 && c.c2 >= 0.0;
            if !ok(e.c) || !ok(e.c_apex) {
                return Err(GenGraphError::InvalidCost { edge: i });
            }
            if !e.c_apex.le(e.c) {
                return Err(GenGraphError::ApexAboveCost { edge: i });
            }
        }
        let of_kind = |k: EdgeKind| {
            edges
                .iter()
                .enumerate()
                .filter(move |(_, e)| e.kind == k)
                .map(|(i, e)| (e.source.idx(), i as u32))
        };
        let (reg_off, reg) = csr(vertex_count, of_kind(EdgeKind::Regular));
        let (sup_off, sup) = csr(vertex_count, of_kind(EdgeKind::Super));
        let (in_off, inc) = csr(
            vertex_count,
            edges.iter().enumerate().map(|(i, e)| (e.target.idx(), i as u32)),
        );
        Ok(GenGraph {
            vertex_count,
            edges,
            reg_off,
            reg,
            sup_off,
            sup,
            in_off,
            inc,
        })
    }

    /// All-regular generalized graph over `g`, one edge per original edge.
    pub fn from_bigraph(g: &BiGraph) -> Self {
        let edges = g
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| GenEdge {
                origin: EdgeOrigin::Original(EdgeId::from(i)),
                ..GenEdge::regular(e.source, e.target, e.cost)
            })
            .collect();
        GenGraph::new(g.vertex_count(), edges).expect("BiGraph edges are valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[GenEdge] {
        &self.edges
    }

    pub fn edge(&self, i: u32) -> &GenEdge {
        &self.edges[i as usize]
    }

    pub fn regular_out(&self, v: VertexId) -> &[u32] {
        let v = v.idx();
        &self.reg[self.reg_off[v] as usize..self.reg_off[v + 1] as usize]
    }

    pub fn super_out(&self, v: VertexId) -> &[u32] {
        let v = v.idx();
        &self.sup[self.sup_off[v] as usize..self.sup_off[v + 1] as usize]
    }

    pub fn in_edges(&self, v: VertexId) -> &[u32] {
        let v = v.idx();
        &self.inc[self.in_off[v] as usize..self.in_off[v + 1] as usize]
    }

    pub fn super_edge_count(&self) -> usize {
        self.sup.len()
    }

    /// `|E| / |V|`.
    pub fn branching_factor(&self) -> f64 {
        if self.vertex_count == 0 {
            0.0
        } else {
            self.edges.len() as f64 / self.vertex_count as f64
        }
    }

    /// Index of the first edge that is not ε-bounded, if any.
    pub fn first_unbounded_edge(&self, eps: Eps) -> Option<usize> {
        self.edges.iter().position(|e| !e.is_eps_bounded(eps))
    }
}

impl ArcSource for GenGraph {
    fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Walks apex costs, which is what heuristics must lower-bound.
    fn for_each_arc(&self, v: usize, dir: Direction, mut f: impl FnMut(usize, u32, CostVec)) {
        match dir {
            Direction::Forward => {
                let vid = VertexId(v as u32);
                for &i in self.regular_out(vid).iter().chain(self.super_out(vid)) {
                    let e = &self.edges[i as usize];
                    f(e.target.idx(), i, e.c_apex);
                }
            }
            Direction::Reverse => {
                for &i in self.in_edges(VertexId(v as u32)) {
                    let e = &self.edges[i as usize];
                    f(e.source.idx(), i, e.c_apex);
                }
            }
        }
    }
}

/// Per-vertex lower bound on the remaining cost to the target.
#[derive(Debug, Clone, PartialEq)]
pub struct Heuristic {
    h: Vec<CostVec>,
}

impl Heuristic {
    pub fn from_vec(h: Vec<CostVec>) -> Self {
        Heuristic { h }
    }

    pub fn zero(n: usize) -> Self {
        Heuristic {
            h: vec![CostVec::ZERO; n],
        }
    }

    #[inline]
    pub fn get(&self, v: VertexId) -> CostVec {
        self.h[v.idx()]
    }

    pub fn as_slice(&self) -> &[CostVec] {
        &self.h
    }

    /// `h(u) <= c_apex(u, v) + h(v)` per objective for every edge.
    pub fn is_consistent(&self, g: &GenGraph) -> bool {
        g.edges().iter().all(|e| {
            let (hu, hv) = (self.get(e.source), self.get(e.target));
            hu.c1 <= e.c_apex.c1 + hv.c1 && hu.c2 <= e.c_apex.c2 + hv.c2
        })
    }
}

/// Ideal-point heuristic: one reverse Dijkstra per objective over apex costs.
pub fn build_heuristic(g: &GenGraph, t: VertexId) -> Heuristic {
    let d1 = lex_dijkstra(g, t.idx(), Objective::First, Direction::Reverse, None);
    let d2 = lex_dijkstra(g, t.idx(), Objective::Second, Direction::Reverse, None);
    Heuristic {
        h: d1
            .cost
            .iter()
            .zip(&d2.cost)
            .map(|(a, b)| CostVec { c1: a.c1, c2: b.c2 })
            .collect(),
    }
}

/// An apex together with the cost of its representative path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApexPathPair {
    pub vertex: VertexId,
    pub apex: CostVec,
    pub rep: CostVec,
}

impl ApexPathPair {
    pub fn root(v: VertexId) -> Self {
        ApexPathPair {
            vertex: v,
            apex: CostVec::ZERO,
            rep: CostVec::ZERO,
        }
    }

    /// `rep + h` ε-dominates `apex + h`.
    pub fn is_eps_bounded(&self, h: CostVec, eps: Eps) -> bool {
        eps_dominates(self.rep + h, self.apex + h, eps)
    }
}

/// Extends a pair along an apex-edge pair: apex by `c_apex`, representative by `c`.
pub fn expand_pair(ap: &ApexPathPair, edge: &GenEdge) -> ApexPathPair {
    ApexPathPair {
        vertex: edge.target,
        apex: ap.apex + edge.c_apex,
        rep: ap.rep + edge.c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeChoice {
    KeepFirst,
    KeepSecond,
}

/// Merges two pairs at the same vertex under the element-wise minimum apex.
///
/// The surviving representative must keep the pair ε-bounded; when both do,
/// the lexicographically smaller cost wins, `a` on ties.
pub fn try_merge(a: &ApexPathPair, b: &ApexPathPair, eps: Eps, h: CostVec) -> Option<(ApexPathPair, MergeChoice)> {
    debug_assert_eq!(a.vertex, b.vertex);
    let apex = a.apex.min(b.apex);
    let ok = |rep: CostVec| eps_dominates(rep + h, apex + h, eps);
    let choice = match (ok(a.rep), ok(b.rep)) {
        (true, true) if b.rep.lex_cmp(&a.rep).is_lt() => MergeChoice::KeepSecond,
        (true, _) => MergeChoice::KeepFirst,
        (false, true) => MergeChoice::KeepSecond,
        (false, false) => return None,
    };
    let rep = match choice {
        MergeChoice::KeepFirst => a.rep,
        MergeChoice::KeepSecond => b.rep,
    };
    Some((
        ApexPathPair {
            vertex: a.vertex,
            apex,
            rep,
        },
        choice,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Every successor, super-edges included, is generated on expansion.
    #[default]
    Plain,
    /// Super-edge successors are generated one at a time in f-order.
    PartialExpansion,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions {
    pub mode: SearchMode,
    /// Route regular edges through the general apex-edge expansion instead of
    /// the trivial-edge shortcut. Results are identical; used to check that.
    pub force_general: bool,
    pub record_trace: bool,
}

impl SearchOptions {
    pub fn plain() -> Self {
        Self::default()
    }

    pub fn partial() -> Self {
        SearchOptions {
            mode: SearchMode::PartialExpansion,
            ..Self::default()
        }
    }
}

/// One expansion, in extraction order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub vertex: VertexId,
    pub apex: CostVec,
    pub rep: CostVec,
    pub f: CostVec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expansions: u64,
    pub generations: u64,
    pub open_peak: u64,
    pub merges: u64,
    pub super_generated: u64,
    /// Super-edge successors that entered OPEN, either as new pairs or merged.
    pub super_inserted: u64,
    pub solutions: u64,
    pub wall_ms: f64,
    #[serde(skip)]
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub apex: CostVec,
    /// Cost of the representative path.
    pub cost: CostVec,
    /// Representative path as generalized-edge indices.
    pub edges: Vec<u32>,
}

#[derive(Debug, Clone, Default)]
pub struct SearchOutcome {
    /// In insertion order.
    pub solutions: Vec<Solution>,
    pub stats: SearchStats,
}

impl SearchOutcome {
    pub fn costs(&self) -> Vec<CostVec> {
        self.solutions.iter().map(|s| s.cost).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Open,
    Closed,
}

#[derive(Debug, Clone)]
struct Node {
    pair: ApexPathPair,
    parent: u32,
    via: u32,
    version: u32,
    state: State,
    /// Pending `(parent node, next index into its sorted super-edges)`.
    cursors: Vec<(u32, u32)>,
}

enum Generated {
    Pruned,
    Placed(u32),
}

struct Search<'a> {
    g: &'a GenGraph,
    h: &'a Heuristic,
    t: VertexId,
    eps: Eps,
    opts: SearchOptions,
    nodes: Vec<Node>,
    heap: BinaryHeap<Reverse<(LexKey, u32, u32)>>,
    seq: u64,
    open_at: Vec<Vec<u32>>,
    open_count: u64,
    g2_min: Vec<f64>,
    sols: Vec<u32>,
    sup_order: Vec<Option<Box<[u32]>>>,
    stats: SearchStats,
}

impl<'a> Search<'a> {
    fn f(&self, p: &ApexPathPair) -> CostVec {
        p.apex + self.h.get(p.vertex)
    }

    fn push_heap(&mut self, id: u32) {
        let n = &self.nodes[id as usize];
        let f = n.pair.apex + self.h.get(n.pair.vertex);
        self.seq += 1;
        self.heap.push(Reverse((
            LexKey {
                a: f.c1,
                b: f.c2,
                seq: self.seq,
            },
            id,
            n.version,
        )));
    }

    /// Expanded-set or solution-set pruning. A solution that covers the
    /// candidate absorbs its f-value into its apex.
    fn dominated(&mut self, p: &ApexPathPair) -> bool {
        if p.apex.c2 >= self.g2_min[p.vertex.idx()] {
            return true;
        }
        let f = self.f(p);
        for &sid in &self.sols {
            let sol = &mut self.nodes[sid as usize].pair;
            if eps_dominates(sol.rep, f, self.eps) {
                sol.apex = sol.apex.min(f);
                return true;
            }
        }
        false
    }

    fn generate(&mut self, parent: u32, edge_idx: u32) -> Generated {
        let e = *self.g.edge(edge_idx);
        let is_super = e.kind == EdgeKind::Super;
        self.stats.generations += 1;
        if is_super {
            self.stats.super_generated += 1;
        }
        if !self.h.get(e.target).is_finite() {
            return Generated::Pruned;
        }
        let from = self.nodes[parent as usize].pair;
        let child = if is_super || self.opts.force_general {
            expand_pair(&from, &e)
        } else {
            ApexPathPair {
                vertex: e.target,
                apex: from.apex + e.c,
                rep: from.rep + e.c,
            }
        };
        if self.dominated(&child) {
            return Generated::Pruned;
        }
        let w = e.target.idx();
        let hw = self.h.get(e.target);
        for k in 0..self.open_at[w].len() {
            let oid = self.open_at[w][k];
            let other = self.nodes[oid as usize].pair;
            if let Some((merged, choice)) = try_merge(&other, &child, self.eps, hw) {
                let node = &mut self.nodes[oid as usize];
                node.pair = merged;
                if choice == MergeChoice::KeepSecond {
                    node.parent = parent;
                    node.via = edge_idx;
                }
                node.version += 1;
                self.stats.merges += 1;
                self.push_heap(oid);
                return Generated::Placed(oid);
            }
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            pair: child,
            parent,
            via: edge_idx,
            version: 0,
            state: State::Open,
            cursors: Vec::new(),
        });
        self.open_at[w].push(id);
        self.open_count += 1;
        self.stats.open_peak = self.stats.open_peak.max(self.open_count);
        self.push_heap(id);
        Generated::Placed(id)
    }

    /// Super-edges leaving `v`, by `(c_apex + h(target))` lexicographically.
    fn sorted_super(&mut self, v: VertexId) -> &[u32] {
        if self.sup_order[v.idx()].is_none() {
            let h = self.h;
            let g = self.g;
            let mut list: Vec<u32> = g
                .super_out(v)
                .iter()
                .copied()
                .filter(|&i| h.get(g.edge(i).target).is_finite())
                .collect();
            list.sort_by(|&a, &b| {
                let ka = g.edge(a).c_apex + h.get(g.edge(a).target);
                let kb = g.edge(b).c_apex + h.get(g.edge(b).target);
                ka.lex_cmp(&kb).then(a.cmp(&b))
            });
            self.sup_order[v.idx()] = Some(list.into_boxed_slice());
        }
        self.sup_order[v.idx()].as_deref().unwrap()
    }

    /// Generates the first super-edge successor of `parent` from index `k`
    /// on that enters OPEN, and leaves a cursor on it.
    fn advance_super(&mut self, parent: u32, mut k: u32) {
        let v = self.nodes[parent as usize].pair.vertex;
        let len = self.sorted_super(v).len() as u32;
        while k < len {
            let edge_idx = self.sup_order[v.idx()].as_deref().unwrap()[k as usize];
            k += 1;
            if let Generated::Placed(id) = self.generate(parent, edge_idx) {
                self.stats.super_inserted += 1;
                if k < len {
                    self.nodes[id as usize].cursors.push((parent, k));
                }
                return;
            }
        }
    }

    fn expand(&mut self, id: u32) {
        let v = self.nodes[id as usize].pair.vertex;
        self.stats.expansions += 1;
        if self.opts.record_trace {
            let p = self.nodes[id as usize].pair;
            self.stats.trace.push(TraceEntry {
                vertex: v,
                apex: p.apex,
                rep: p.rep,
                f: self.f(&p),
            });
        }
        let g = self.g;
        for &e in g.regular_out(v) {
            self.generate(id, e);
        }
        match self.opts.mode {
            SearchMode::Plain => {
                for &e in g.super_out(v) {
                    if let Generated::Placed(_) = self.generate(id, e) {
                        self.stats.super_inserted += 1;
                    }
                }
            }
            SearchMode::PartialExpansion => self.advance_super(id, 0),
        }
    }

    fn run(&mut self, s: VertexId) {
        if !self.h.get(s).is_finite() {
            return;
        }
        self.nodes.push(Node {
            pair: ApexPathPair::root(s),
            parent: NONE,
            via: NONE,
            version: 0,
            state: State::Open,
            cursors: Vec::new(),
        });
        self.open_at[s.idx()].push(0);
        self.open_count = 1;
        self.stats.open_peak = 1;
        self.push_heap(0);

        while let Some(Reverse((_, id, version))) = self.heap.pop() {
            let node = &self.nodes[id as usize];
            if node.state != State::Open || node.version != version {
                continue;
            }
            let v = node.pair.vertex;
            self.nodes[id as usize].state = State::Closed;
            let slot = &mut self.open_at[v.idx()];
            let pos = slot.iter().position(|&x| x == id).expect("open node is indexed");
            slot.remove(pos);
            self.open_count -= 1;

            for (parent, k) in std::mem::take(&mut self.nodes[id as usize].cursors) {
                self.advance_super(parent, k);
            }

            let pair = self.nodes[id as usize].pair;
            if self.dominated(&pair) {
                continue;
            }
            self.g2_min[v.idx()] = pair.apex.c2;
            if v == self.t {
                self.sols.push(id);
                continue;
            }
            self.expand(id);
        }
    }

    fn path(&self, mut id: u32) -> Vec<u32> {
        let mut out = Vec::new();
        while self.nodes[id as usize].parent != NONE {
            out.push(self.nodes[id as usize].via);
            id = self.nodes[id as usize].parent;
        }
        out.reverse();
        out
    }
}

/// A*pex from `s` to `t` with the ideal-point heuristic over apex costs.
pub fn search(g: &GenGraph, s: VertexId, t: VertexId, eps: Eps, opts: SearchOptions) -> SearchOutcome {
    let start = Instant::now();
    let h = build_heuristic(g, t);
    let mut out = search_with_heuristic(g, s, t, eps, &h, opts);
    out.stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    out
}

/// As [`search`], with a caller-supplied heuristic that must be consistent
/// with respect to apex costs.
pub fn search_with_heuristic(
    g: &GenGraph,
    s: VertexId,
    t: VertexId,
    eps: Eps,
    h: &Heuristic,
    opts: SearchOptions,
) -> SearchOutcome {
    let start = Instant::now();
    let n = g.vertex_count();
    let mut st = Search {
        g,
        h,
        t,
        eps,
        opts,
        nodes: Vec::new(),
        heap: BinaryHeap::new(),
        seq: 0,
        open_at: vec![Vec::new(); n],
        open_count: 0,
        g2_min: vec![f64::INFINITY; n],
        sols: Vec::new(),
        sup_order: vec![None; n],
        stats: SearchStats::default(),
    };
    st.run(s);
    let solutions: Vec<Solution> = st
        .sols
        .iter()
        .map(|&id| {
            let p = st.nodes[id as usize].pair;
            Solution {
                apex: p.apex,
                cost: p.rep,
                edges: st.path(id),
            }
        })
        .collect();
    let mut stats = st.stats;
    stats.solutions = solutions.len() as u64;
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    SearchOutcome { solutions, stats }
}

/// Vertex sequence of a generalized-edge path starting at `s`.
pub fn path_vertices(g: &GenGraph, s: VertexId, edges: &[u32]) -> Vec<VertexId> {
    let mut out = Vec::with_capacity(edges.len() + 1);
    out.push(s);
    for &e in edges {
        out.push(g.edge(e).target);
    }
    out
}
