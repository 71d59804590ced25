//! Detects correlation lines with RANSAC, then grows clusters of vertices
//! whose incident edges all conform to a common line.

use corrpath::clustering::{delineate_clusters, ransac_detect_lines, RansacParams};
use corrpath::graph_io::{generate_synthetic, normalize_costs, RegionLayout, SyntheticSpec};

fn main() {
    let mut spec = SyntheticSpec::grid(24, 36, 2, 0.008, 7);
    spec.region_layout = RegionLayout::Blocks { rows: 2, cols: 3 };
    let (g, _) = generate_synthetic(&spec).unwrap();
    let (gn, _) = normalize_costs(&g).unwrap();

    let delta = 0.02;
    let lines = ransac_detect_lines(&gn, &RansacParams::new(delta));
    for (k, l) in lines.iter().enumerate() {
        println!("line {k}: y = {:.3} x + {:.3}", l.slope(), -1.0 / l.b());
    }
    let cs = delineate_clusters(&gn, &lines, delta, 8);
    println!(
        "{} clusters, {} trivial vertices",
        cs.clusters.len(),
        cs.trivial_count()
    );
    for c in &cs.clusters {
        println!(
            "  cluster {}: {} vertices, {} boundary, {} interior",
            c.id,
            c.vertices.len(),
            c.boundary.len(),
            c.interior_count()
        );
    }
}
