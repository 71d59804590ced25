//! Planted-correlation graph generator.
//!
//! Vertices are split into spatially contiguous regions; every region carries
//! one planted line and the costs of edges owned by the region are sampled
//! within `delta_plant` of that line in normalized space. Two anchor edges pin
//! the per-objective maxima to exactly `cost_scale`, so normalizing the output
//! recovers the sampled points exactly (the scale is a power of two).

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BiGraph, Edge, GraphError};
use crate::cost::{CostVec, Line2D, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Topology {
    /// 4-neighbour grid, both directions per neighbour pair.
    Grid { rows: usize, cols: usize },
    /// Ring plus `degree / 2 - 1` random local chords per vertex, both directions.
    RandomRegular { n_vertices: usize, degree: usize },
}

impl Topology {
    pub fn vertex_count(&self) -> usize {
        match *self {
            Topology::Grid { rows, cols } => rows * cols,
            Topology::RandomRegular { n_vertices, .. } => n_vertices,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegionLayout {
    /// Tiles a grid topology into `rows x cols` blocks.
    Blocks { rows: usize, cols: usize },
    /// Contiguous vertex-id ranges; works for any topology.
    IdRanges { count: usize },
}

impl RegionLayout {
    pub fn region_count(&self) -> usize {
        match *self {
            RegionLayout::Blocks { rows, cols } => rows * cols,
            RegionLayout::IdRanges { count } => count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub topology: Topology,
    pub n_lines: usize,
    /// Maximum normalized perpendicular distance of a cost from its line.
    pub delta_plant: f64,
    pub region_layout: RegionLayout,
    /// Normalized range objective 1 is sampled from (clipped per line to the unit box).
    pub c1_range: (f64, f64),
    /// Shared `y`-intercept of all planted lines in normalized space.
    pub intercept: f64,
    /// Raw costs are normalized costs times this factor.
    pub cost_scale: f64,
    pub rng_seed: u64,
}

impl SyntheticSpec {
    /// Grid with one vertical strip per line.
    pub fn grid(rows: usize, cols: usize, n_lines: usize, delta_plant: f64, rng_seed: u64) -> Self {
        SyntheticSpec {
            topology: Topology::Grid { rows, cols },
            n_lines,
            delta_plant,
            region_layout: RegionLayout::Blocks { rows: 1, cols: n_lines },
            c1_range: (0.2, 1.0),
            intercept: 0.05,
            cost_scale: 1024.0,
            rng_seed,
        }
    }
}

/// What the generator planted, for recovery tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    /// Lines in normalized cost space.
    pub lines: Vec<Line2D>,
    /// Line index per edge.
    pub edge_line: Vec<usize>,
    pub vertex_region: Vec<usize>,
    pub region_line: Vec<usize>,
}

/// `(slope, intercept)` pairs, shallowest first.
fn planted_lines(n: usize, intercept: f64) -> Vec<(f64, f64)> {
    if n == 1 {
        // passes through (1, 1)
        return vec![(1.0 - intercept, intercept)];
    }
    let (lo, hi) = (25f64.to_radians(), 65f64.to_radians());
    (0..n)
        .map(|k| {
            let theta = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            (theta.tan(), intercept)
        })
        .collect()
}

fn undirected_pairs(topology: Topology, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    match topology {
        Topology::Grid { rows, cols } => {
            let mut pairs = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let u = (r * cols + c) as u32;
                    if c + 1 < cols {
                        pairs.push((u, u + 1));
                    }
                    if r + 1 < rows {
                        pairs.push((u, u + cols as u32));
                    }
                }
            }
            pairs
        }
        Topology::RandomRegular { n_vertices: n, degree } => {
            let mut set = BTreeSet::new();
            if n < 2 {
                return Vec::new();
            }
            let window = (2 * degree).max(4).min(n - 1);
            for u in 0..n {
                let ring = (u + 1) % n;
                set.insert((u.min(ring), u.max(ring)));
                for _ in 1..degree / 2 {
                    let v = (u + 1 + rng.gen_range(0..window)) % n;
                    if v != u {
                        set.insert((u.min(v), u.max(v)));
                    }
                }
            }
            set.into_iter().map(|(a, b)| (a as u32, b as u32)).collect()
        }
    }
}

fn vertex_regions(topology: Topology, layout: RegionLayout) -> Result<Vec<usize>, GraphError> {
    let n = topology.vertex_count();
    match (topology, layout) {
        (Topology::Grid { rows, cols }, RegionLayout::Blocks { rows: br, cols: bc }) => {
            if br > rows || bc > cols {
                return Err(GraphError::Infeasible(format!(
                    "{br}x{bc} blocks do not fit a {rows}x{cols} grid"
                )));
            }
            Ok((0..n)
                .map(|v| {
                    let (r, c) = (v / cols, v % cols);
                    (r * br / rows) * bc + c * bc / cols
                })
                .collect())
        }
        (_, RegionLayout::Blocks { .. }) => Err(GraphError::Infeasible("block layout needs a grid topology".into())),
        (_, RegionLayout::IdRanges { count }) => Ok((0..n).map(|v| v * count / n).collect()),
    }
}

/// Samples a point within `delta` of the line `y = slope * x + intercept`,
/// inside the unit box with positive components.
fn sample_point(rng: &mut ChaCha8Rng, slope: f64, intercept: f64, x_lo: f64, x_hi: f64, delta: f64) -> CostVec {
    let norm = slope.hypot(1.0);
    let (nx, ny) = (-slope / norm, 1.0 / norm);
    for _ in 0..1000 {
        let x = if x_hi > x_lo { rng.gen_range(x_lo..=x_hi) } else { x_lo };
        let y = slope * x + intercept;
        let t = if delta > 0.0 {
            rng.gen_range(-delta..=delta)
        } else {
            0.0
        };
        let p = (x + t * nx, y + t * ny);
        if p.0 > 0.0 && p.1 > 0.0 && p.0 <= 1.0 && p.1 <= 1.0 {
            return CostVec { c1: p.0, c2: p.1 };
        }
    }
    let x = 0.5 * (x_lo + x_hi);
    CostVec {
        c1: x,
        c2: slope * x + intercept,
    }
}

/// Generates a graph with planted linear cost correlations.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(BiGraph, PlantedTruth), GraphError> {
    let n = spec.topology.vertex_count();
    let regions = spec.region_layout.region_count();
    if spec.n_lines == 0 {
        return Err(GraphError::Infeasible("need at least one line".into()));
    }
    if n == 0 {
        return Err(GraphError::Infeasible("empty topology".into()));
    }
    if regions == 0 || regions > n {
        return Err(GraphError::Infeasible(format!("{regions} regions for {n} vertices")));
    }
    if regions < spec.n_lines {
        return Err(GraphError::Infeasible(format!(
            "{regions} regions cannot host {} lines",
            spec.n_lines
        )));
    }
    if !(spec.delta_plant >= 0.0) {
        return Err(GraphError::Infeasible("delta_plant must be non-negative".into()));
    }
    if !(spec.intercept > 0.0 && spec.intercept < 1.0) {
        return Err(GraphError::Infeasible("intercept must lie in (0, 1)".into()));
    }
    let (x_lo, x_hi) = spec.c1_range;
    if !(0.0 < x_lo && x_lo <= x_hi && x_hi <= 1.0) {
        return Err(GraphError::Infeasible("c1_range must satisfy 0 < lo <= hi <= 1".into()));
    }
    if !(spec.cost_scale > 0.0 && spec.cost_scale.is_finite()) {
        return Err(GraphError::Infeasible("cost_scale must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let params = planted_lines(spec.n_lines, spec.intercept);
    let vertex_region = vertex_regions(spec.topology, spec.region_layout)?;
    let region_line: Vec<usize> = (0..regions).map(|r| r % spec.n_lines).collect();
    let pairs = undirected_pairs(spec.topology, &mut rng);

    // per-line upper end of objective 1 inside the unit box
    let x_max: Vec<f64> = params.iter().map(|&(m, c)| ((1.0 - c) / m).min(x_hi)).collect();

    let mut pair_line = Vec::with_capacity(pairs.len());
    let mut points = Vec::with_capacity(pairs.len());
    for &(u, v) in &pairs {
        let line = region_line[vertex_region[u.min(v) as usize]];
        let (m, c) = params[line];
        let hi = x_max[line];
        let lo = x_lo.min(hi);
        points.push(sample_point(&mut rng, m, c, lo, hi, spec.delta_plant));
        pair_line.push(line);
    }

    // anchors: the shallowest line reaches c1 = 1, the steepest reaches c2 = 1
    let last = spec.n_lines - 1;
    let (m0, c0) = params[0];
    let (ml, cl) = params[last];
    if m0 + c0 > 1.0 + 1e-12 || ml + cl < 1.0 - 1e-12 || x_hi < 1.0 {
        return Err(GraphError::Infeasible("planted lines do not span the unit box".into()));
    }
    let first0 = pair_line.iter().position(|&l| l == 0);
    let first_last = pair_line.iter().position(|&l| l == last);
    let (Some(i0), Some(il)) = (first0, first_last) else {
        return Err(GraphError::Infeasible("a planted line received no edges".into()));
    };
    points[i0] = CostVec { c1: 1.0, c2: m0 + c0 };
    if last == 0 {
        points[i0] = CostVec { c1: 1.0, c2: 1.0 };
    } else {
        points[il] = CostVec {
            c1: (1.0 - cl) / ml,
            c2: 1.0,
        };
    }

    let mut edges = Vec::with_capacity(pairs.len() * 2);
    let mut edge_line = Vec::with_capacity(pairs.len() * 2);
    for ((&(u, v), &p), &line) in pairs.iter().zip(&points).zip(&pair_line) {
        let cost = CostVec {
            c1: p.c1 * spec.cost_scale,
            c2: p.c2 * spec.cost_scale,
        };
        for (s, t) in [(u, v), (v, u)] {
            edges.push(Edge {
                source: VertexId(s),
                target: VertexId(t),
                cost,
            });
            edge_line.push(line);
        }
    }

    let lines = params
        .iter()
        .map(|&(m, c)| Line2D::from_slope_intercept(m, c).expect("intercept is non-zero"))
        .collect();
    let graph = BiGraph::new(n, edges)?;
    Ok((
        graph,
        PlantedTruth {
            lines,
            edge_line,
            vertex_region,
            region_line,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::perp_distance;
    use crate::graph_io::{normalize_costs, NormalizationScales};

    fn max_offset(g: &BiGraph, t: &PlantedTruth) -> f64 {
        let (ng, _) = normalize_costs(g).unwrap();
        ng.edges()
            .iter()
            .zip(&t.edge_line)
            .map(|(e, &l)| perp_distance(t.lines[l], e.cost))
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_noise_single_line_is_exact() {
        let (g, t) = generate_synthetic(&SyntheticSpec::grid(10, 10, 1, 0.0, 7)).unwrap();
        assert_eq!(t.lines.len(), 1);
        assert!(max_offset(&g, &t) <= 1e-9);
    }

    #[test]
    fn three_lines_conform() {
        let (g, t) = generate_synthetic(&SyntheticSpec::grid(50, 50, 3, 0.02, 11)).unwrap();
        assert!(max_offset(&g, &t) <= 0.02 + 1e-12);
        let (_, s) = normalize_costs(&g).unwrap();
        assert_eq!(
            s,
            NormalizationScales {
                max_c1: 1024.0,
                max_c2: 1024.0
            }
        );
        for l in &t.lines {
            assert!(l.slope() > 0.0);
        }
    }

    #[test]
    fn deterministic() {
        let spec = SyntheticSpec::grid(12, 9, 2, 0.01, 3);
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        let mut other = spec.clone();
        other.rng_seed = 4;
        assert_ne!(generate_synthetic(&other).unwrap().0, a.0);
    }

    #[test]
    fn random_regular_topology() {
        let spec = SyntheticSpec {
            topology: Topology::RandomRegular {
                n_vertices: 200,
                degree: 4,
            },
            region_layout: RegionLayout::IdRanges { count: 4 },
            ..SyntheticSpec::grid(1, 1, 2, 0.01, 5)
        };
        let (g, t) = generate_synthetic(&spec).unwrap();
        assert_eq!(g.vertex_count(), 200);
        assert!(g.edge_count() >= 400);
        assert!(max_offset(&g, &t) <= 0.01 + 1e-12);
    }

    #[test]
    fn infeasible_specs() {
        let mut spec = SyntheticSpec::grid(2, 2, 1, 0.0, 1);
        spec.region_layout = RegionLayout::IdRanges { count: 5 };
        assert!(matches!(generate_synthetic(&spec), Err(GraphError::Infeasible(_))));
        assert!(generate_synthetic(&SyntheticSpec::grid(3, 3, 0, 0.0, 1)).is_err());
        let mut neg = SyntheticSpec::grid(3, 3, 1, 0.0, 1);
        neg.delta_plant = -1.0;
        assert!(generate_synthetic(&neg).is_err());
    }
}
