//! Preprocess once, then answer queries with GA*pex and its partial-expansion
//! variant, comparing against A*pex on the original graph.

use corrpath::apex_search::{search, GenGraph, SearchOptions};
use corrpath::cost::{Eps, VertexId};
use corrpath::graph_io::{generate_synthetic, RegionLayout, SyntheticSpec};
use corrpath::icca::{preprocess, PreprocParams};
use corrpath::query::QueryEngine;

fn main() {
    let mut spec = SyntheticSpec::grid(30, 40, 3, 0.008, 11);
    spec.region_layout = RegionLayout::Blocks { rows: 2, cols: 4 };
    let (g, _) = generate_synthetic(&spec).unwrap();
    let eps = Eps::uniform(0.02);

    let pre = preprocess(&g, &PreprocParams::new(0.02, eps)).unwrap();
    let r = &pre.report;
    println!(
        "{} clusters, {} super-edges; |V| {} -> {}, b {:.2} -> {:.2}, {:.2}s",
        r.clusters, r.super_edges, r.vertices, r.query_vertices, r.branching_original, r.branching_query, r.wall_s
    );
    let engine = QueryEngine::new(&g, pre.artifact).unwrap();
    let plain = GenGraph::from_bigraph(&g);

    for (s, t) in [(0, 1199), (15, 1185), (600, 39)] {
        let (s, t) = (VertexId(s), VertexId(t));
        let apex = search(&plain, s, t, eps, SearchOptions::plain());
        println!("{} -> {}", s.0, t.0);
        println!(
            "  apex      {:>3} solutions {:>6} expansions {:>7.2} ms",
            apex.solutions.len(),
            apex.stats.expansions,
            apex.stats.wall_ms
        );
        for (name, opts) in [
            ("gapex", SearchOptions::plain()),
            ("pe-gapex", SearchOptions::partial()),
        ] {
            let res = engine.solve(s, t, eps, opts).unwrap();
            println!(
                "  {name:<9} {:>3} solutions {:>6} expansions {:>7.2} ms, {} super successors inserted, graph {} vertices",
                res.solutions.len(),
                res.stats.expansions,
                res.stats.wall_ms,
                res.stats.super_inserted,
                res.query_vertices
            );
        }
    }
}
