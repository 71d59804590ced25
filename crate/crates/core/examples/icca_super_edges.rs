//! Super-edges for a small cluster whose interior frontier from b_i to b_j is
//! {(20,100), (80,30), (90,28)}.

use corrpath::clustering::ClusterSet;
use corrpath::cost::{Eps, Line2D, VertexId};
use corrpath::graph_io::BiGraph;
use corrpath::icca::icca_pair;

fn main() {
    // b_i = 0, u = 1, v = 2, b_j = 3; vertex 4 is outside the cluster
    let g = BiGraph::from_arcs(
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
    .unwrap();
    let line = Line2D::from_slope_intercept(1.0, 0.1).unwrap();
    let cs = ClusterSet::from_vertex_sets(&g, vec![(line, (0..4).map(VertexId).collect())]);
    let (edges, route) = icca_pair(&g, &cs.clusters[0], VertexId(0), VertexId(3), Eps::uniform(0.1));
    println!("route: {route:?}");
    for e in &edges {
        println!(
            "super-edge c = ({}, {}), apex = ({}, {}), path {:?}",
            e.cost.c1,
            e.cost.c2,
            e.apex.c1,
            e.apex.c2,
            e.path.as_ref().map(|p| g.path_vertices(e.from, p))
        );
    }
}
