//! Joins a distance and a time DIMACS file into one bi-objective graph.
//!
//! `cargo run --example dimacs_load -- USA-road-d.NY.gr USA-road-t.NY.gr`
//! Relative paths are also tried under `$CORRPATH_DATA_DIR`. Without
//! arguments a tiny inline pair is used.

use std::fs::File;
use std::io::BufReader;

use corrpath::cli::resolve_input;
use corrpath::graph_io::{load_dimacs_pair, normalize_costs};

const DIST: &str = "c distance\np sp 3 3\na 1 2 4\na 2 3 5\na 1 3 11\n";
const TIME: &str = "c time\np sp 3 3\na 1 2 2\na 2 3 2\na 1 3 3\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let g = match args.as_slice() {
        [d, t] => {
            let open = |p: &str| File::open(resolve_input(p.as_ref())).map(BufReader::new);
            load_dimacs_pair(open(d)?, open(t)?)?
        }
        _ => load_dimacs_pair(DIST.as_bytes(), TIME.as_bytes())?,
    };
    println!("|V| = {}, |E| = {}", g.vertex_count(), g.edge_count());
    println!("branching factor {:.3}", g.branching_factor());
    let (_, scales) = normalize_costs(&g)?;
    println!("normalization scales {scales:?}");
    for e in g.edges().iter().take(5) {
        println!("  {} -> {}  {:?}", e.source.0, e.target.0, e.cost);
    }
    Ok(())
}
