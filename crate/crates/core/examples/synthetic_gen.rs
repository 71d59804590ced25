//! Planted-correlation instance: each grid block draws costs near one line.

use corrpath::clustering::pearson;
use corrpath::graph_io::{generate_synthetic, normalize_costs, RegionLayout, SyntheticSpec};

fn main() {
    let mut spec = SyntheticSpec::grid(30, 40, 3, 0.01, 42);
    spec.region_layout = RegionLayout::Blocks { rows: 2, cols: 4 };
    let (g, truth) = generate_synthetic(&spec).unwrap();
    println!("{} vertices, {} edges", g.vertex_count(), g.edge_count());
    for (k, l) in truth.lines.iter().enumerate() {
        let n = truth.edge_line.iter().filter(|&&x| x == k).count();
        println!("line {k}: slope {:.3}, {n} edges", l.slope());
    }
    println!("region -> line {:?}", truth.region_line);
    let (gn, _) = normalize_costs(&g).unwrap();
    let costs: Vec<_> = gn.edges().iter().map(|e| e.cost).collect();
    println!("pearson over all edges {:.3}", pearson(&costs).unwrap());
}
