//! Per-query benchmark rows as CSV, with speedup over A*pex.

use corrpath::cli::{bench_records, write_bench_csv, Algo};
use corrpath::cost::Eps;
use corrpath::graph_io::{generate_synthetic, RegionLayout, SyntheticSpec};
use corrpath::icca::{preprocess, PreprocParams};

fn main() {
    let mut spec = SyntheticSpec::grid(30, 40, 2, 0.008, 3);
    spec.region_layout = RegionLayout::Blocks { rows: 2, cols: 3 };
    let (g, _) = generate_synthetic(&spec).unwrap();
    let eps = Eps::uniform(0.02);
    let pre = preprocess(&g, &PreprocParams::new(0.02, eps)).unwrap();
    let queries = [(0, 1199), (39, 1160), (20, 1180)];
    let algos = [Algo::Apex, Algo::Gapex, Algo::PeGapex];
    let rows = bench_records(&g, Some(pre.artifact), "grid30x40", &queries, eps, &algos).unwrap();
    write_bench_csv(&rows, std::io::stdout().lock()).unwrap();
}
