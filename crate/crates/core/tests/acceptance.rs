//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.
//!
//! Run with `cargo test --test acceptance`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use corrpath::apex_search::{search, EdgeKind, EdgeOrigin, GenEdge, GenGraph, SearchMode, SearchOptions};
use corrpath::cli::{bench_records, validate_bench_csv, write_bench_csv, Algo};
use corrpath::clustering::{ransac_detect_lines, ClusterSet, RansacParams};
use corrpath::cost::{eps_dominates, eps_dominates_tol, perp_distance, CostVec, Eps, Line2D, VertexId};
use corrpath::graph_io::{generate_synthetic, load_dimacs_pair, normalize_costs, BiGraph, RegionLayout, SyntheticSpec};
use corrpath::icca::{icca_cluster, preprocess, PreprocParams, PreprocReport};
use corrpath::oracle::exact_pareto;
use corrpath::query::QueryEngine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !($cond) {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let el = start.elapsed();
    if el > limit {
        Err(format!("took {el:.2?}, limit {limit:?}"))
    } else {
        Ok(el)
    }
}

fn random_bigraph(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> BiGraph {
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(1..=max_m);
    let arcs: Vec<_> = (0..m)
        .map(|_| {
            (
                rng.gen_range(0..n) as u32,
                rng.gen_range(0..n) as u32,
                rng.gen_range(1..=100) as f64,
                rng.gen_range(1..=100) as f64,
            )
        })
        .collect();
    BiGraph::from_arcs(n, arcs).unwrap()
}

/// Integer costs as exact `(i64, i64)` pairs.
fn key(c: CostVec) -> (i64, i64) {
    assert!(c.c1.fract() == 0.0 && c.c2.fract() == 0.0, "non-integer cost {c:?}");
    (c.c1 as i64, c.c2 as i64)
}

/// Pareto-minimal distinct points, sorted by first objective.
fn pareto_filter(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    let mut out: Vec<(i64, i64)> = Vec::new();
    for p in pts {
        if out.last().is_none_or(|l| p.1 < l.1) {
            out.push(p);
        }
    }
    out
}

/// Every simple s-t path, by depth-first enumeration.
fn brute_force_frontier(g: &BiGraph, s: VertexId, t: VertexId) -> Vec<(i64, i64)> {
    fn dfs(g: &BiGraph, v: VertexId, t: VertexId, acc: (i64, i64), seen: &mut Vec<bool>, out: &mut Vec<(i64, i64)>) {
        if v == t {
            out.push(acc);
            return;
        }
        for &e in g.out_edges(v) {
            let edge = g.edge(e);
            let w = edge.target;
            if seen[w.idx()] {
                continue;
            }
            seen[w.idx()] = true;
            let c = key(edge.cost);
            dfs(g, w, t, (acc.0 + c.0, acc.1 + c.1), seen, out);
            seen[w.idx()] = false;
        }
    }
    let mut seen = vec![false; g.vertex_count()];
    seen[s.idx()] = true;
    let mut out = Vec::new();
    dfs(g, s, t, (0, 0), &mut seen, &mut out);
    pareto_filter(out)
}

fn c1_oracle_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut nonempty = 0;
    for i in 0..200 {
        let g = random_bigraph(&mut rng, 12, 40);
        let n = g.vertex_count() as u32;
        let s = VertexId(rng.gen_range(0..n));
        let t = VertexId((s.0 + rng.gen_range(1..n)) % n);
        let want = brute_force_frontier(&g, s, t);
        let got: Vec<_> = exact_pareto(&g, s, t, None).costs().into_iter().map(key).collect();
        ensure!(got == want, "graph {i}: oracle {got:?} vs enumeration {want:?}");
        nonempty += !want.is_empty() as usize;
    }
    let el = within(Duration::from_secs(10), start)?;
    Ok(format!("200 graphs ({nonempty} with paths) in {el:.2?}"))
}

fn c2_apex_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut exact_runs = 0;
    for i in 0..200 {
        let g = random_bigraph(&mut rng, 50, 200);
        let gen = GenGraph::from_bigraph(&g);
        let n = g.vertex_count() as u32;
        let s = VertexId(rng.gen_range(0..n));
        let t = VertexId((s.0 + rng.gen_range(1..n)) % n);
        let oracle = exact_pareto(&g, s, t, None).costs();
        let eps = Eps::new(rng.gen_range(0.0..=0.2), rng.gen_range(0.0..=0.2));
        let got = search(&gen, s, t, eps, SearchOptions::plain()).costs();
        for p in &oracle {
            ensure!(
                got.iter().any(|q| eps_dominates(*q, *p, eps)),
                "graph {i}: frontier cost {p:?} not covered at eps {eps:?}"
            );
        }
        let zero = search(&gen, s, t, Eps::ZERO, SearchOptions::plain()).costs();
        let mut a: Vec<_> = zero.into_iter().map(key).collect();
        a.sort_unstable();
        let b: Vec<_> = oracle.iter().copied().map(key).collect();
        ensure!(a == b, "graph {i}: eps=0 result {a:?} vs frontier {b:?}");
        exact_runs += 1;
    }
    let el = within(Duration::from_secs(30), start)?;
    Ok(format!(
        "{exact_runs} graphs, eps-cover and eps=0 equality, in {el:.2?}"
    ))
}

/// `x <= (1 + p/q) * y`, exactly.
fn rat_le(x: i128, y: i128, p: i128, q: i128) -> bool {
    x * q <= (q + p) * y
}

fn c3_expansion_fuzz() -> Outcome {
    use corrpath::apex_search::{expand_pair, ApexPathPair};
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut violations = 0u64;
    const N: usize = 100_000;
    for _ in 0..N {
        let q: i64 = rng.gen_range(1..=1000);
        let p = [rng.gen_range(0..=q / 2), rng.gen_range(0..=q / 2)];
        // bounded draws: base + k with k <= base * p / q
        let mut draw = |k: usize| {
            let base: i64 = rng.gen_range(0..=1_000_000);
            let slack = base * p[k] / q;
            (base, base + rng.gen_range(0..=slack))
        };
        let (a1, r1) = draw(0);
        let (a2, r2) = draw(1);
        let (ea1, ec1) = draw(0);
        let (ea2, ec2) = draw(1);
        let f = |x: i64| x as f64;
        let ap = ApexPathPair {
            vertex: VertexId(0),
            apex: CostVec::new(f(a1), f(a2)),
            rep: CostVec::new(f(r1), f(r2)),
        };
        let edge = GenEdge {
            source: VertexId(0),
            target: VertexId(1),
            c: CostVec::new(f(ec1), f(ec2)),
            c_apex: CostVec::new(f(ea1), f(ea2)),
            kind: EdgeKind::Super,
            origin: EdgeOrigin::Plain,
        };
        let out = expand_pair(&ap, &edge);
        // integer costs below 2^53 add exactly
        let get = |x: f64| x as i128;
        let (q, p1, p2) = (q as i128, p[0] as i128, p[1] as i128);
        let ok = out.vertex == VertexId(1)
            && get(out.apex.c1) == (a1 + ea1) as i128
            && get(out.rep.c2) == (r2 + ec2) as i128
            && rat_le(get(out.rep.c1), get(out.apex.c1), p1, q)
            && rat_le(get(out.rep.c2), get(out.apex.c2), p2, q);
        violations += !ok as u64;
    }
    ensure!(violations == 0, "{violations} violations in {N} expansions");
    Ok(format!("{N} expansions, 0 violations (exact rational check)"))
}

fn c4_generalized_guarantee() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut widest = Eps::ZERO;
    for i in 0..100 {
        let n = rng.gen_range(2..=30);
        let m = rng.gen_range(1..=120);
        let mut arcs = Vec::new();
        let mut edges = Vec::new();
        for _ in 0..m {
            let (u, v) = (rng.gen_range(0..n) as u32, rng.gen_range(0..n) as u32);
            let c = CostVec::new(rng.gen_range(1..=100) as f64, rng.gen_range(1..=100) as f64);
            let lo = |x: f64, rng: &mut ChaCha8Rng| rng.gen_range(1..=x as i64) as f64;
            let ca = CostVec::new(lo(c.c1, &mut rng), lo(c.c2, &mut rng));
            arcs.push((u, v, c.c1, c.c2));
            edges.push(GenEdge {
                source: VertexId(u),
                target: VertexId(v),
                c,
                c_apex: ca,
                kind: EdgeKind::Super,
                origin: EdgeOrigin::Plain,
            });
        }
        let ratio = |f: fn(&GenEdge) -> (f64, f64)| edges.iter().map(|e| f(e).0 / f(e).1).fold(1.0, f64::max) - 1.0;
        let eps = Eps::new(ratio(|e| (e.c.c1, e.c_apex.c1)), ratio(|e| (e.c.c2, e.c_apex.c2)));
        widest = Eps::new(widest.e1.max(eps.e1), widest.e2.max(eps.e2));
        let gen = GenGraph::new(n, edges).map_err(|e| e.to_string())?;
        let g = BiGraph::from_arcs(n, arcs).map_err(|e| e.to_string())?;
        let s = VertexId(rng.gen_range(0..n as u32));
        let t = VertexId((s.0 + rng.gen_range(1..n as u32)) % n as u32);
        let oracle = exact_pareto(&g, s, t, None).costs();
        for mode in [SearchMode::Plain, SearchMode::PartialExpansion] {
            let opts = SearchOptions {
                mode,
                ..SearchOptions::default()
            };
            let got = search(&gen, s, t, eps, opts).costs();
            for p in &oracle {
                // eps is itself a rounded quotient, hence the 1e-12 slack
                ensure!(
                    got.iter().any(|q| eps_dominates_tol(*q, *p, eps, 1e-12)),
                    "graph {i} ({mode:?}): {p:?} not covered at eps {eps:?}"
                );
            }
        }
    }
    Ok(format!(
        "100 graphs, plain and partial expansion; largest eps ({:.2}, {:.2})",
        widest.e1, widest.e2
    ))
}

fn diamond() -> BiGraph {
    // b_i=0, u=1, v=2, b_j=3; vertex 4 lies outside so 0 and 3 are boundary vertices
    BiGraph::from_arcs(
        5,
        [
            (0, 1, 10.0, 10.0),
            (1, 2, 30.0, 10.0),
            (2, 3, 40.0, 10.0),
            (1, 3, 10.0, 90.0),
            (0, 2, 50.0, 18.0),
            (4, 0, 1.0, 1.0),
            (3, 4, 1.0, 1.0),
        ],
    )
    .unwrap()
}

fn c5_diamond() -> Outcome {
    let g = diamond();
    let eps = Eps::uniform(0.1);
    let frontier = exact_pareto(&g, VertexId(0), VertexId(3), Some(&[true, true, true, true, false][..])).costs();
    ensure!(
        frontier
            == vec![
                CostVec::new(20.0, 100.0),
                CostVec::new(80.0, 30.0),
                CostVec::new(90.0, 28.0)
            ],
        "interior frontier {frontier:?}"
    );
    let line = Line2D::from_slope_intercept(1.0, 0.1).unwrap();
    let cs = ClusterSet::from_vertex_sets(&g, vec![(line, (0..4).map(VertexId).collect())]);
    ensure!(
        cs.clusters[0].boundary == vec![VertexId(0), VertexId(3)],
        "boundary {:?}",
        cs.clusters[0].boundary
    );
    let (supers, _) = icca_cluster(&g, &cs.clusters[0], eps);
    let across: Vec<_> = supers
        .iter()
        .filter(|e| e.from == VertexId(0) && e.to == VertexId(3))
        .map(|e| (e.cost, e.apex))
        .collect();
    let want = vec![
        (CostVec::new(20.0, 100.0), CostVec::new(20.0, 100.0)),
        (CostVec::new(80.0, 30.0), CostVec::new(80.0, 28.0)),
    ];
    ensure!(across == want, "super-edges {across:?}");

    // query over the generalized graph made of just those super-edges
    let gen_edges = supers
        .iter()
        .filter(|e| e.from == VertexId(0) && e.to == VertexId(3))
        .enumerate()
        .map(|(k, e)| GenEdge {
            source: e.from,
            target: e.to,
            c: e.cost,
            c_apex: e.apex,
            kind: EdgeKind::Super,
            origin: EdgeOrigin::Super(k as u32),
        })
        .collect();
    let gen = GenGraph::new(4, gen_edges).map_err(|e| e.to_string())?;
    for opts in [SearchOptions::plain(), SearchOptions::partial()] {
        let mut got = search(&gen, VertexId(0), VertexId(3), eps, opts).costs();
        got.sort_by(|a, b| a.c1.total_cmp(&b.c1));
        ensure!(
            got == vec![CostVec::new(20.0, 100.0), CostVec::new(80.0, 30.0)],
            "query {got:?}"
        );
    }
    // and A*pex across the intact cluster agrees
    let mut direct = search(
        &GenGraph::from_bigraph(&g),
        VertexId(0),
        VertexId(3),
        eps,
        SearchOptions::plain(),
    )
    .costs();
    direct.sort_by(|a, b| a.c1.total_cmp(&b.c1));
    ensure!(
        direct == vec![CostVec::new(20.0, 100.0), CostVec::new(80.0, 30.0)],
        "direct {direct:?}"
    );
    Ok("super-edges ((20,100),(20,100)) and ((80,30),(80,28)); query {(20,100),(80,30)}".into())
}

fn c6_icca_sweep() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut fast, mut fallback, mut pairs) = (0u64, 0u64, 0u64);
    for i in 0..50 {
        let k = rng.gen_range(4..=30);
        let outside = rng.gen_range(2..=6);
        let n = k + outside;
        let correlated = i % 2 == 0;
        let mut arcs = Vec::new();
        let cost = |rng: &mut ChaCha8Rng| {
            let c1 = rng.gen_range(1..=100) as f64;
            let c2 = if correlated {
                c1 + rng.gen_range(0..=10) as f64
            } else {
                rng.gen_range(1..=100) as f64
            };
            (c1, c2)
        };
        for _ in 0..rng.gen_range(k..=4 * k) {
            let (c1, c2) = cost(&mut rng);
            arcs.push((rng.gen_range(0..k) as u32, rng.gen_range(0..k) as u32, c1, c2));
        }
        for o in k..n {
            for _ in 0..2 {
                let inner = rng.gen_range(0..k) as u32;
                let (a, b) = if rng.gen_bool(0.5) {
                    (o as u32, inner)
                } else {
                    (inner, o as u32)
                };
                arcs.push((a, b, 1.0, 1.0));
            }
        }
        let g = BiGraph::from_arcs(n, arcs).map_err(|e| e.to_string())?;
        let line = Line2D::from_slope_intercept(1.0, 0.1).unwrap();
        let cs = ClusterSet::from_vertex_sets(&g, vec![(line, (0..k as u32).map(VertexId).collect())]);
        let cluster = &cs.clusters[0];
        let eps = Eps::new(rng.gen_range(0.0..=0.2), rng.gen_range(0.0..=0.2));
        let (supers, stats) = icca_cluster(&g, cluster, eps);
        fast += stats.fast_obj1 + stats.fast_obj2;
        fallback += stats.fallback;
        let inside: Vec<bool> = (0..n).map(|v| v < k).collect();
        for &bi in &cluster.boundary {
            for &bj in &cluster.boundary {
                if bi == bj {
                    continue;
                }
                pairs += 1;
                let here: Vec<_> = supers.iter().filter(|e| e.from == bi && e.to == bj).collect();
                for se in &here {
                    ensure!(se.is_eps_bounded(eps), "cluster {i}: unbounded super-edge {se:?}");
                    if let Some(p) = &se.path {
                        ensure!(g.path_cost(p) == se.cost, "cluster {i}: stored path cost differs");
                    }
                }
                for p in exact_pareto(&g, bi, bj, Some(&inside)).costs() {
                    ensure!(
                        here.iter().any(|e| eps_dominates(e.cost, p, eps)),
                        "cluster {i}: {bi:?}->{bj:?} frontier cost {p:?} not covered"
                    );
                }
            }
        }
    }
    ensure!(
        fast >= 1 && fallback >= 1,
        "fast path {fast}, fallback {fallback}: both must occur"
    );
    Ok(format!(
        "50 clusters, {pairs} boundary pairs; fast path {fast}, fallback {fallback}"
    ))
}

/// Planted grid whose blocks alternate lines, so every block is its own
/// cluster. Costs are rounded to integers so sums are exact.
fn planted(seed: u64, rows: usize, cols: usize, n_lines: usize, delta_plant: f64) -> BiGraph {
    let mut spec = SyntheticSpec::grid(rows, cols, n_lines, delta_plant, seed);
    spec.region_layout = RegionLayout::Blocks {
        rows: 2,
        cols: n_lines + 1,
    };
    let (g, _) = generate_synthetic(&spec).unwrap();
    g.map_costs(|c| CostVec::new(c.c1.round().max(1.0), c.c2.round().max(1.0)))
}

struct PipelineTotals {
    queries: u64,
    hidden_queries: u64,
    shrunk: u64,
    super_inserted_plain: u64,
    super_inserted_pe: u64,
    pe_above_plain: u64,
    reports: Vec<PreprocReport>,
}

fn run_pipeline_suite() -> Result<(PipelineTotals, Duration), String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut tot = PipelineTotals {
        queries: 0,
        hidden_queries: 0,
        shrunk: 0,
        super_inserted_plain: 0,
        super_inserted_pe: 0,
        pe_above_plain: 0,
        reports: Vec::new(),
    };
    for i in 0..100u64 {
        let n_lines = rng.gen_range(2..=4);
        let rows = rng.gen_range(16..=40);
        let cols = rng.gen_range(16..=2000 / rows).min(50);
        let delta = 0.02;
        let g = planted(1000 + i, rows, cols, n_lines, rng.gen_range(0.0..=0.01));
        let eps = Eps::new(rng.gen_range(0.0..=0.1), rng.gen_range(0.0..=0.1));
        let mut params = PreprocParams::new(delta, eps);
        params.ransac.rng_seed = i;
        let pre = preprocess(&g, &params).map_err(|e| format!("instance {i}: {e}"))?;
        tot.reports.push(pre.report.clone());
        let engine = QueryEngine::new(&g, pre.artifact).map_err(|e| format!("instance {i}: {e}"))?;
        let n = g.vertex_count() as u32;
        for _ in 0..2 {
            let s = VertexId(rng.gen_range(0..n));
            let t = VertexId((s.0 + rng.gen_range(1..n)) % n);
            let oracle = exact_pareto(&g, s, t, None).costs();
            let hidden_exists = g.vertices().any(|v| engine.is_hidden(v, s, t));
            let mut inserted = [0u64; 2];
            for (k, mode) in [SearchMode::Plain, SearchMode::PartialExpansion]
                .into_iter()
                .enumerate()
            {
                let opts = SearchOptions {
                    mode,
                    record_trace: true,
                    ..SearchOptions::default()
                };
                let res = engine
                    .solve(s, t, eps, opts)
                    .map_err(|e| format!("instance {i}: {e}"))?;
                inserted[k] = res.stats.super_inserted;
                let costs: Vec<CostVec> = res
                    .solutions
                    .iter()
                    .map(|sol| g.path_cost(sol.edges.as_ref().expect("paths kept")))
                    .collect();
                for (sol, c) in res.solutions.iter().zip(&costs) {
                    ensure!(
                        sol.cost == *c,
                        "instance {i}: reported cost {:?} vs path cost {c:?}",
                        sol.cost
                    );
                }
                for p in &oracle {
                    ensure!(
                        costs.iter().any(|q| eps_dominates(*q, *p, eps)),
                        "instance {i} {s:?}->{t:?} ({mode:?}): frontier cost {p:?} not covered at {eps:?}"
                    );
                }
                if let Some(v) = res.expanded.iter().find(|&&v| engine.is_hidden(v, s, t)) {
                    return Err(format!("instance {i} ({mode:?}): expanded hidden vertex {v:?}"));
                }
                if hidden_exists && k == 0 {
                    ensure!(
                        res.query_vertices < g.vertex_count(),
                        "instance {i}: query graph has {} of {} vertices despite hidden clusters",
                        res.query_vertices,
                        g.vertex_count()
                    );
                    tot.shrunk += 1;
                }
            }
            tot.queries += 1;
            tot.hidden_queries += hidden_exists as u64;
            tot.super_inserted_plain += inserted[0];
            tot.super_inserted_pe += inserted[1];
            tot.pe_above_plain += (inserted[1] > inserted[0]) as u64;
        }
    }
    Ok((tot, start.elapsed()))
}

fn c7_end_to_end(suite: &Result<(PipelineTotals, Duration), String>) -> Outcome {
    let (tot, el) = suite.as_ref().map_err(Clone::clone)?;
    ensure!(*el <= Duration::from_secs(300), "took {el:.2?}, limit 300s");
    ensure!(
        tot.hidden_queries > 0,
        "no query had a hidden cluster; the trace check is vacuous"
    );
    Ok(format!(
        "100 instances, {} queries x 2 modes covered; {} with hidden clusters, none expanded; {el:.2?}",
        tot.queries, tot.hidden_queries
    ))
}

fn c8_ransac_recovery() -> Outcome {
    let delta = 0.02;
    let mut worst = 1.0f64;
    for i in 0..20u64 {
        let spec = SyntheticSpec::grid(30, 30, 2, 0.0099, 800 + i);
        let (g, truth) = generate_synthetic(&spec).map_err(|e| e.to_string())?;
        let (gn, _) = normalize_costs(&g).map_err(|e| e.to_string())?;
        let mut p = RansacParams::new(delta);
        p.rng_seed = i;
        let min_inliers = p.min_inliers_for(g.edge_count());
        for l in 0..2 {
            let count = truth.edge_line.iter().filter(|&&x| x == l).count();
            ensure!(count > min_inliers, "instance {i}: line {l} has only {count} edges");
        }
        let lines = ransac_detect_lines(&gn, &p);
        ensure!(lines.len() == 2, "instance {i}: detected {} lines", lines.len());
        // match each detected line to the planted line most of its inliers carry
        let mut matched = [usize::MAX; 2];
        for (k, line) in lines.iter().enumerate() {
            let mut votes = [0usize; 2];
            for (e, edge) in gn.edges().iter().enumerate() {
                if perp_distance(*line, edge.cost) <= delta {
                    votes[truth.edge_line[e]] += 1;
                }
            }
            matched[k] = if votes[0] >= votes[1] { 0 } else { 1 };
        }
        ensure!(
            matched[0] != matched[1],
            "instance {i}: both detected lines match planted line {}",
            matched[0]
        );
        let detected_for = |l: usize| if matched[0] == l { lines[0] } else { lines[1] };
        let good = gn
            .edges()
            .iter()
            .enumerate()
            .filter(|(e, edge)| perp_distance(detected_for(truth.edge_line[*e]), edge.cost) <= delta)
            .count();
        let frac = good as f64 / g.edge_count() as f64;
        worst = worst.min(frac);
        ensure!(
            frac >= 0.95,
            "instance {i}: only {:.1}% of edges in their line's inlier set",
            frac * 100.0
        );
    }
    Ok(format!(
        "20 instances, 2 lines each; worst assignment {:.1}%",
        worst * 100.0
    ))
}

const NY_VERTICES: f64 = 264_346.0;
const NY_EDGES: f64 = 733_846.0;

fn ny_check() -> Result<Option<String>, String> {
    let Some(dir) = std::env::var_os("CORRPATH_DATA_DIR") else {
        return Ok(None);
    };
    let dir = std::path::PathBuf::from(dir);
    let (d, t) = (dir.join("USA-road-d.NY.gr"), dir.join("USA-road-t.NY.gr"));
    if !d.exists() || !t.exists() {
        return Ok(None);
    }
    let open = |p: &std::path::Path| {
        std::fs::File::open(p)
            .map(std::io::BufReader::new)
            .map_err(|e| e.to_string())
    };
    let g = load_dimacs_pair(open(&d)?, open(&t)?).map_err(|e| e.to_string())?;
    let (n, m) = (g.vertex_count() as f64, g.edge_count() as f64);
    ensure!((n / 2.6e5 - 1.0).abs() <= 0.05, "NY |V| = {n}");
    ensure!((m / 7.3e5 - 1.0).abs() <= 0.05, "NY |E| = {m}");
    let pre = preprocess(&g, &PreprocParams::new(0.01, Eps::uniform(0.01))).map_err(|e| e.to_string())?;
    let r = &pre.report;
    ensure!(r.query_vertices < r.vertices, "NY: no vertex reduction");
    ensure!(r.branching_query > r.branching_original, "NY: branching did not grow");
    Ok(Some(format!(
        "NY |V| {n} (ref {NY_VERTICES}), |E| {m} (ref {NY_EDGES}); |V~| {}, b {:.2} -> {:.2}",
        r.query_vertices, r.branching_original, r.branching_query
    )))
}

fn c9_query_graph_shape(suite: &Result<(PipelineTotals, Duration), String>) -> Outcome {
    let (tot, _) = suite.as_ref().map_err(Clone::clone)?;
    ensure!(
        tot.shrunk == tot.hidden_queries && tot.shrunk > 0,
        "shrunk {} of {}",
        tot.shrunk,
        tot.hidden_queries
    );
    for (i, r) in tot.reports.iter().enumerate() {
        ensure!(
            r.branching_original.is_finite() && r.branching_original > 0.0 && r.branching_query.is_finite(),
            "instance {i}: branching factors {} / {}",
            r.branching_original,
            r.branching_query
        );
        if r.clusters > 0 {
            ensure!(
                r.query_vertices < r.vertices,
                "instance {i}: |V~| {} >= |V|",
                r.query_vertices
            );
        }
    }
    let grew = tot
        .reports
        .iter()
        .filter(|r| r.branching_query > r.branching_original)
        .count();
    let ny = match ny_check()? {
        Some(s) => s,
        None => "NY data absent, optional part skipped".into(),
    };
    Ok(format!(
        "{} queries shrank the graph; b grew on {grew}/{} instances; {ny}",
        tot.shrunk,
        tot.reports.len()
    ))
}

fn c10_bench_and_pe(suite: &Result<(PipelineTotals, Duration), String>) -> Outcome {
    let (tot, _) = suite.as_ref().map_err(Clone::clone)?;
    ensure!(
        tot.super_inserted_pe <= tot.super_inserted_plain,
        "pe-gapex inserted {} super successors, gapex {}",
        tot.super_inserted_pe,
        tot.super_inserted_plain
    );
    let g = planted(4242, 24, 30, 3, 0.005);
    let eps = Eps::uniform(0.02);
    let pre = preprocess(&g, &PreprocParams::new(0.02, eps)).map_err(|e| e.to_string())?;
    let queries = [(0, 719), (30, 700), (359, 5)];
    let algos = [Algo::Apex, Algo::Gapex, Algo::PeGapex];
    let rows = bench_records(&g, Some(pre.artifact), "planted", &queries, eps, &algos).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_bench_csv(&rows, &mut buf).map_err(|e| e.to_string())?;
    let back = validate_bench_csv(buf.as_slice())?;
    ensure!(back.len() == queries.len() * algos.len(), "{} rows", back.len());
    ensure!(
        back.iter().all(|r| r.speedup_vs_apex.is_some()),
        "missing speedup values"
    );
    Ok(format!(
        "bench CSV has speedup_vs_apex on all {} rows; super successors inserted pe {} <= plain {} ({} queries with pe above plain)",
        back.len(),
        tot.super_inserted_pe,
        tot.super_inserted_plain,
        tot.pe_above_plain
    ))
}

fn main() {
    // `cargo test` passes harness flags; a name filter that excludes us skips the gate
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let mut failures = 0;
    let mut report = |n: usize, name: &str, out: Outcome| match out {
        Ok(msg) => println!("PASS {n:>2} {name}: {msg}"),
        Err(msg) => {
            failures += 1;
            println!("FAIL {n:>2} {name}: {msg}");
        }
    };
    let guard = |f: &dyn Fn() -> Outcome| -> Outcome {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        })
    };
    report(1, "oracle exactness", guard(&c1_oracle_exactness));
    report(2, "A*pex correctness", guard(&c2_apex_correctness));
    report(3, "expansion keeps eps-boundedness", guard(&c3_expansion_fuzz));
    report(4, "generalized search guarantee", guard(&c4_generalized_guarantee));
    report(5, "four-vertex cluster golden", guard(&c5_diamond));
    report(6, "ICCA sweep", guard(&c6_icca_sweep));
    let suite = catch_unwind(run_pipeline_suite).unwrap_or_else(|_| Err("pipeline suite panicked".into()));
    report(7, "end-to-end pipeline", guard(&|| c7_end_to_end(&suite)));
    report(8, "RANSAC recovery", guard(&c8_ransac_recovery));
    report(9, "query-graph shape", guard(&|| c9_query_graph_shape(&suite)));
    report(
        10,
        "bench CSV and partial expansion",
        guard(&|| c10_bench_and_pe(&suite)),
    );
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
