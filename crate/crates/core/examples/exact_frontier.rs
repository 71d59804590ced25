//! Exact Pareto frontier and the two lexicographic extremes.

use corrpath::cost::VertexId;
use corrpath::graph_io::BiGraph;
use corrpath::oracle::{exact_pareto, extreme_pair};

fn main() {
    let g = BiGraph::from_arcs(
        4,
        [
            (0, 1, 10.0, 10.0),
            (1, 2, 30.0, 10.0),
            (2, 3, 40.0, 10.0),
            (1, 3, 10.0, 90.0),
            (0, 2, 50.0, 18.0),
        ],
    )
    .unwrap();
    let (s, t) = (VertexId(0), VertexId(3));
    for p in &exact_pareto(&g, s, t, None).paths {
        println!(
            "cost ({}, {}) via {:?}",
            p.cost.c1,
            p.cost.c2,
            g.path_vertices(s, &p.edges)
        );
    }
    let ex = extreme_pair(&g, s, t, None).unwrap();
    println!("best for objective 1: {:?}", ex.obj1.cost);
    println!("best for objective 2: {:?}", ex.obj2.cost);
    println!("ideal point: {:?}", ex.ideal());
}
