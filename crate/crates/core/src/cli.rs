//! Command-line front end: convert, preprocess, query, bench, gen, self-check.
//!
//! Exit codes are 0 on success, 2 on bad usage and 3 on bad data.
//! Relative input paths that do not exist are retried under `$CORRPATH_DATA_DIR`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apex_search::{path_vertices, search, GenGraph, SearchOptions, SearchStats};
use crate::cost::{eps_dominates_tol, CostVec, Eps, VertexId};
use crate::graph_io::{
    generate_synthetic, load_artifact, load_dimacs_pair, read_graph, save_artifact, write_graph, BiGraph, PlantedTruth,
    PreprocArtifact, RegionLayout, SyntheticSpec, Topology,
};
use crate::icca::{preprocess, PreprocParams, PreprocReport};
use crate::oracle::exact_pareto;
use crate::query::QueryEngine;

pub const DATA_DIR_ENV: &str = "CORRPATH_DATA_DIR";
pub const QUERY_SCHEMA: &str = "corrpath.query/1";
pub const PREPROCESS_SCHEMA: &str = "corrpath.preprocess/1";
pub const BENCH_SCHEMA: &str = "corrpath.bench/1";
pub const TRUTH_SCHEMA: &str = "corrpath.truth/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

fn data<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Data(format!("{context}: {e}"))
}

#[derive(Debug, Parser)]
#[command(
    name = "corrpath",
    version,
    about = "Bi-objective shortest paths with correlation clusters"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Join two DIMACS .gr files over the same arcs into one graph file.
    Convert(ConvertArgs),
    /// Detect correlated clusters and build the super-edge artifact.
    Preprocess(PreprocessArgs),
    /// Answer one s-t query.
    Query(QueryArgs),
    /// Run a file of queries under several algorithms and write a CSV.
    Bench(BenchArgs),
    /// Generate a synthetic instance with planted correlation lines.
    Gen(GenArgs),
    /// Validate report files, or run a small end-to-end smoke test.
    SelfCheck(SelfCheckArgs),
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// Arc costs for objective 1.
    first: PathBuf,
    /// Arc costs for objective 2; arcs must match `first` line by line.
    second: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    /// Swap which file supplies objective 1.
    #[arg(long)]
    swap: bool,
}

/// Accepts `e` or `e1,e2`.
fn parse_eps(s: &str) -> Result<Eps, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
    let nums = nums.map_err(|e| format!("bad eps {s:?}: {e}"))?;
    let (e1, e2) = match nums.as_slice() {
        [e] => (*e, *e),
        [a, b] => (*a, *b),
        _ => return Err(format!("eps takes one or two values, got {s:?}")),
    };
    Eps::try_new(e1, e2).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    graph: PathBuf,
    /// Conformance threshold in normalized cost space.
    #[arg(long)]
    delta: f64,
    #[arg(long, value_parser = parse_eps)]
    eps: Eps,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    hypotheses: usize,
    /// A line needs more inliers than this; default 1% of the edges.
    #[arg(long)]
    min_inliers: Option<usize>,
    #[arg(long, default_value_t = 16)]
    max_rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smaller clusters are dissolved.
    #[arg(long, default_value_t = 8)]
    min_cluster: usize,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Omit representative paths from the artifact.
    #[arg(long)]
    drop_paths: bool,
    /// Try cluster seeds in an order shuffled with this seed instead of ascending ids.
    #[arg(long)]
    shuffle_seeds: Option<u64>,
    /// Write the detected lines as CSV.
    #[arg(long)]
    lines_csv: Option<PathBuf>,
    /// Write per-vertex cluster membership as CSV.
    #[arg(long)]
    membership_csv: Option<PathBuf>,
    /// Also write the JSON report row to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    /// A*pex on the original graph.
    Apex,
    /// GA*pex on the query graph.
    Gapex,
    /// Partial-expansion GA*pex on the query graph.
    PeGapex,
    /// Exact Pareto frontier.
    Exact,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Apex => "apex",
            Algo::Gapex => "gapex",
            Algo::PeGapex => "pe-gapex",
            Algo::Exact => "exact",
        }
    }

    fn needs_artifact(self) -> bool {
        matches!(self, Algo::Gapex | Algo::PeGapex)
    }
}

#[derive(Debug, Args)]
struct QueryArgs {
    graph: PathBuf,
    #[arg(long)]
    artifact: Option<PathBuf>,
    #[arg(short, long)]
    source: u32,
    #[arg(short, long)]
    target: u32,
    #[arg(long, value_parser = parse_eps)]
    eps: Eps,
    #[arg(long, value_enum, default_value_t = Algo::PeGapex)]
    algo: Algo,
    /// Include vertex sequences of the solution paths.
    #[arg(long)]
    paths: bool,
    /// Write the JSON here instead of stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    graph: PathBuf,
    #[arg(long)]
    artifact: Option<PathBuf>,
    /// Whitespace-separated `s t` lines; `#` starts a comment.
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, value_parser = parse_eps)]
    eps: Eps,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "apex,pe-gapex")]
    algos: Vec<Algo>,
    #[arg(short, long)]
    out: PathBuf,
    /// Instance label written to every row; defaults to the graph file stem.
    #[arg(long)]
    instance: Option<String>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 50)]
    rows: usize,
    #[arg(long, default_value_t = 50)]
    cols: usize,
    /// Use a ring-with-chords topology on this many vertices instead of a grid.
    #[arg(long)]
    regular: Option<usize>,
    #[arg(long, default_value_t = 4)]
    degree: usize,
    #[arg(long, default_value_t = 2)]
    lines: usize,
    #[arg(long, default_value_t = 0.01)]
    delta_plant: f64,
    /// `blocks:RxC` (grid only) or `ids:K`; default one region per line.
    #[arg(long)]
    layout: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
    /// Ground-truth JSON.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelfCheckArgs {
    /// Report files to validate (query/preprocess JSON, bench CSV).
    files: Vec<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{shown}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{shown}");
                    EXIT_USAGE
                }
            };
        }
    };
    let res = match cli.cmd {
        Command::Convert(a) => cmd_convert(&a, out),
        Command::Preprocess(a) => cmd_preprocess(&a, out),
        Command::Query(a) => cmd_query(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Gen(a) => cmd_gen(&a, out),
        Command::SelfCheck(a) => cmd_self_check(&a, out),
    };
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> Result<R, CliError> + Send) -> Result<R, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// Relative paths that do not exist are looked up under `$CORRPATH_DATA_DIR`.
pub fn resolve_input(p: &Path) -> PathBuf {
    if p.is_relative() && !p.exists() {
        if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
            let alt = Path::new(&dir).join(p);
            if alt.exists() {
                return alt;
            }
        }
    }
    p.to_path_buf()
}

fn open_input(p: &Path) -> Result<BufReader<File>, CliError> {
    let path = resolve_input(p);
    File::open(&path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn create_output(p: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(p)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))
}

fn load_graph(p: &Path) -> Result<BiGraph, CliError> {
    read_graph(open_input(p)?).map_err(data(&p.display().to_string()))
}

fn write_json<T: Serialize>(v: &T, w: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer(&mut *w, v).map_err(data("json"))?;
    writeln!(w).map_err(data("write"))
}

fn cmd_convert(a: &ConvertArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (f1, f2) = if a.swap {
        (&a.second, &a.first)
    } else {
        (&a.first, &a.second)
    };
    let g = load_dimacs_pair(open_input(f1)?, open_input(f2)?).map_err(data("dimacs"))?;
    let mut w = create_output(&a.out)?;
    write_graph(&g, &mut w).map_err(data("write graph"))?;
    w.flush().map_err(data("write graph"))?;
    writeln!(
        out,
        "wrote {} vertices, {} edges to {}",
        g.vertex_count(),
        g.edge_count(),
        a.out.display()
    )
    .map_err(data("stdout"))
}

/// One preprocessing run, as printed by `preprocess`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessRecord {
    pub schema: String,
    pub instance: String,
    pub delta: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub artifact_bytes: u64,
    pub report: PreprocReport,
}

fn instance_name(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn cmd_preprocess(a: &PreprocessArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let mut params = PreprocParams::new(a.delta, a.eps);
    params.ransac.n_hypotheses = a.hypotheses;
    params.ransac.n_min_inliers = a.min_inliers;
    params.ransac.max_rounds = a.max_rounds;
    params.ransac.rng_seed = a.seed;
    params.n_min_vertices = a.min_cluster;
    params.keep_paths = !a.drop_paths;
    params.shuffle_seeds = a.shuffle_seeds;
    let pre = with_jobs(a.jobs, || {
        preprocess(&g, &params).map_err(|e| CliError::Data(e.to_string()))
    })?;

    let mut bytes = Vec::new();
    save_artifact(&pre.artifact, &mut bytes).map_err(data("artifact"))?;
    std::fs::write(&a.out, &bytes).map_err(data(&a.out.display().to_string()))?;

    if let Some(p) = &a.lines_csv {
        let mut w = csv::Writer::from_writer(create_output(p)?);
        w.write_record(["line", "a", "b", "slope", "intercept"])
            .map_err(data("csv"))?;
        for (i, l) in pre.artifact.lines.iter().enumerate() {
            let intercept = -1.0 / l.b();
            let row = [l.a(), l.b(), l.slope(), intercept].map(|x| x.to_string());
            w.write_record(std::iter::once(i.to_string()).chain(row))
                .map_err(data("csv"))?;
        }
        w.flush().map_err(data("csv"))?;
    }
    if let Some(p) = &a.membership_csv {
        let mut boundary = vec![false; g.vertex_count()];
        for c in &pre.clusters.clusters {
            for &b in &c.boundary {
                boundary[b.idx()] = true;
            }
        }
        let mut w = csv::Writer::from_writer(create_output(p)?);
        w.write_record(["vertex", "cluster", "boundary"]).map_err(data("csv"))?;
        for v in g.vertices() {
            let c = pre.clusters.nontrivial_id(v).map(|c| c.to_string()).unwrap_or_default();
            w.write_record([v.0.to_string(), c, (boundary[v.idx()] as u8).to_string()])
                .map_err(data("csv"))?;
        }
        w.flush().map_err(data("csv"))?;
    }

    let rec = PreprocessRecord {
        schema: PREPROCESS_SCHEMA.into(),
        instance: instance_name(&a.graph),
        delta: a.delta,
        eps1: a.eps.e1,
        eps2: a.eps.e2,
        artifact_bytes: bytes.len() as u64,
        report: pre.report,
    };
    if let Some(p) = &a.report {
        let mut w = create_output(p)?;
        write_json(&rec, &mut w)?;
        w.flush().map_err(data("report"))?;
    }
    write_json(&rec, out)
}

/// One (query, algorithm) run. Also the bench CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRecord {
    pub schema: String,
    pub instance: String,
    pub s: u32,
    pub t: u32,
    pub eps1: f64,
    pub eps2: f64,
    pub algorithm: String,
    pub solutions: u64,
    pub expansions: u64,
    pub generations: u64,
    pub open_peak: u64,
    pub merges: u64,
    pub super_generated: u64,
    pub super_inserted: u64,
    pub graph_vertices: u64,
    pub graph_edges: u64,
    pub wall_ms: f64,
    /// A*pex wall time over this row's, when A*pex ran on the same query.
    pub speedup_vs_apex: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionRecord {
    pub cost: CostVec,
    pub apex: CostVec,
    pub vertices: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryOutput {
    pub schema: String,
    pub record: QueryRecord,
    pub solutions: Vec<SolutionRecord>,
}

/// The graph plus whatever each algorithm needs, built on first use.
struct Runner<'a> {
    g: &'a BiGraph,
    engine: Option<QueryEngine<'a>>,
    plain: OnceLock<GenGraph>,
}

struct RunOutput {
    solutions: Vec<SolutionRecord>,
    stats: SearchStats,
    graph_vertices: usize,
    graph_edges: usize,
}

impl<'a> Runner<'a> {
    fn new(g: &'a BiGraph, artifact: Option<PreprocArtifact>) -> Result<Self, CliError> {
        let engine = match artifact {
            Some(a) => Some(QueryEngine::new(g, a).map_err(data("artifact"))?),
            None => None,
        };
        Ok(Runner {
            g,
            engine,
            plain: OnceLock::new(),
        })
    }

    fn check_algo(&self, algo: Algo) -> Result<(), CliError> {
        if algo.needs_artifact() && self.engine.is_none() {
            return Err(CliError::Usage(format!("algorithm {} needs --artifact", algo.name())));
        }
        Ok(())
    }

    fn run(&self, algo: Algo, s: u32, t: u32, eps: Eps, paths: bool) -> Result<RunOutput, CliError> {
        let n = self.g.vertex_count();
        for v in [s, t] {
            if v as usize >= n {
                return Err(CliError::Data(format!(
                    "vertex {v} out of range (graph has {n} vertices)"
                )));
            }
        }
        let (s, t) = (VertexId(s), VertexId(t));
        match algo {
            Algo::Apex => {
                let gen = self.plain.get_or_init(|| GenGraph::from_bigraph(self.g));
                let res = search(gen, s, t, eps, SearchOptions::plain());
                let solutions = res
                    .solutions
                    .iter()
                    .map(|sol| SolutionRecord {
                        cost: sol.cost,
                        apex: sol.apex,
                        vertices: paths.then(|| path_vertices(gen, s, &sol.edges).iter().map(|v| v.0).collect()),
                    })
                    .collect();
                Ok(RunOutput {
                    solutions,
                    stats: res.stats,
                    graph_vertices: gen.vertex_count(),
                    graph_edges: gen.edge_count(),
                })
            }
            Algo::Gapex | Algo::PeGapex => {
                self.check_algo(algo)?;
                let engine = self.engine.as_ref().expect("checked");
                let opts = if algo == Algo::Gapex {
                    SearchOptions::plain()
                } else {
                    SearchOptions::partial()
                };
                let res = engine.solve(s, t, eps, opts).map_err(data("query"))?;
                let solutions = res
                    .solutions
                    .iter()
                    .map(|sol| SolutionRecord {
                        cost: sol.cost,
                        apex: sol.apex,
                        vertices: if paths {
                            sol.edges
                                .as_ref()
                                .map(|e| self.g.path_vertices(s, e).iter().map(|v| v.0).collect())
                        } else {
                            None
                        },
                    })
                    .collect();
                Ok(RunOutput {
                    solutions,
                    stats: res.stats,
                    graph_vertices: res.query_vertices,
                    graph_edges: res.query_edges,
                })
            }
            Algo::Exact => {
                let start = Instant::now();
                let front = exact_pareto(self.g, s, t, None);
                let solutions: Vec<_> = front
                    .paths
                    .iter()
                    .map(|p| SolutionRecord {
                        cost: p.cost,
                        apex: p.cost,
                        vertices: paths.then(|| self.g.path_vertices(s, &p.edges).iter().map(|v| v.0).collect()),
                    })
                    .collect();
                let stats = SearchStats {
                    solutions: solutions.len() as u64,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                    ..SearchStats::default()
                };
                Ok(RunOutput {
                    solutions,
                    stats,
                    graph_vertices: n,
                    graph_edges: self.g.edge_count(),
                })
            }
        }
    }
}

fn record(instance: &str, s: u32, t: u32, eps: Eps, algo: Algo, r: &RunOutput) -> QueryRecord {
    QueryRecord {
        schema: QUERY_SCHEMA.into(),
        instance: instance.into(),
        s,
        t,
        eps1: eps.e1,
        eps2: eps.e2,
        algorithm: algo.name().into(),
        solutions: r.solutions.len() as u64,
        expansions: r.stats.expansions,
        generations: r.stats.generations,
        open_peak: r.stats.open_peak,
        merges: r.stats.merges,
        super_generated: r.stats.super_generated,
        super_inserted: r.stats.super_inserted,
        graph_vertices: r.graph_vertices as u64,
        graph_edges: r.graph_edges as u64,
        wall_ms: r.stats.wall_ms,
        speedup_vs_apex: None,
    }
}

fn load_runner_artifact(p: Option<&PathBuf>) -> Result<Option<PreprocArtifact>, CliError> {
    match p {
        Some(p) => Ok(Some(
            load_artifact(open_input(p)?).map_err(data(&p.display().to_string()))?,
        )),
        None => Ok(None),
    }
}

fn cmd_query(a: &QueryArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.algo.needs_artifact() && a.artifact.is_none() {
        return Err(CliError::Usage(format!("algorithm {} needs --artifact", a.algo.name())));
    }
    let g = load_graph(&a.graph)?;
    let runner = Runner::new(&g, load_runner_artifact(a.artifact.as_ref())?)?;
    let r = runner.run(a.algo, a.source, a.target, a.eps, a.paths)?;
    let output = QueryOutput {
        schema: QUERY_SCHEMA.into(),
        record: record(&instance_name(&a.graph), a.source, a.target, a.eps, a.algo, &r),
        solutions: r.solutions,
    };
    match &a.out {
        Some(p) => {
            let mut w = create_output(p)?;
            write_json(&output, &mut w)?;
            w.flush().map_err(data("write"))
        }
        None => write_json(&output, out),
    }
}

/// Parses `s t` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_query_file<R: BufRead>(r: R) -> Result<Vec<(u32, u32)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(data("query file"))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let bad = || CliError::Data(format!("query file line {}: expected `s t`, got {line:?}", i + 1));
        if toks.len() != 2 {
            return Err(bad());
        }
        let s = toks[0].parse().map_err(|_| bad())?;
        let t = toks[1].parse().map_err(|_| bad())?;
        out.push((s, t));
    }
    Ok(out)
}

/// Runs every query under every algorithm; rows are ordered by query, then
/// by the order of `algos`.
pub fn bench_records(
    g: &BiGraph,
    artifact: Option<PreprocArtifact>,
    instance: &str,
    queries: &[(u32, u32)],
    eps: Eps,
    algos: &[Algo],
) -> Result<Vec<QueryRecord>, CliError> {
    let runner = Runner::new(g, artifact)?;
    for &algo in algos {
        runner.check_algo(algo)?;
    }
    let tasks: Vec<(usize, Algo)> = (0..queries.len())
        .flat_map(|q| algos.iter().map(move |&a| (q, a)))
        .collect();
    let mut rows = tasks
        .par_iter()
        .map(|&(q, algo)| {
            let (s, t) = queries[q];
            runner
                .run(algo, s, t, eps, false)
                .map(|r| record(instance, s, t, eps, algo, &r))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for chunk in rows.chunks_mut(algos.len().max(1)) {
        let apex = chunk
            .iter()
            .find(|r| r.algorithm == Algo::Apex.name())
            .map(|r| r.wall_ms);
        if let Some(base) = apex {
            for r in chunk.iter_mut() {
                r.speedup_vs_apex = Some(if r.wall_ms > 0.0 {
                    base / r.wall_ms
                } else {
                    f64::INFINITY
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(rows: &[QueryRecord], w: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(w);
    for r in rows {
        let row = QueryRecord {
            schema: BENCH_SCHEMA.into(),
            ..r.clone()
        };
        w.serialize(row).map_err(data("csv"))?;
    }
    if rows.is_empty() {
        w.write_record(BENCH_HEADER).map_err(data("csv"))?;
    }
    w.flush().map_err(data("csv"))
}

pub const BENCH_HEADER: [&str; 18] = [
    "schema",
    "instance",
    "s",
    "t",
    "eps1",
    "eps2",
    "algorithm",
    "solutions",
    "expansions",
    "generations",
    "open_peak",
    "merges",
    "super_generated",
    "super_inserted",
    "graph_vertices",
    "graph_edges",
    "wall_ms",
    "speedup_vs_apex",
];

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.algos.is_empty() {
        return Err(CliError::Usage("no algorithms given".into()));
    }
    if a.artifact.is_none() {
        if let Some(al) = a.algos.iter().find(|al| al.needs_artifact()) {
            return Err(CliError::Usage(format!("algorithm {} needs --artifact", al.name())));
        }
    }
    let g = load_graph(&a.graph)?;
    let queries = parse_query_file(open_input(&a.queries)?)?;
    let instance = a.instance.clone().unwrap_or_else(|| instance_name(&a.graph));
    let artifact = load_runner_artifact(a.artifact.as_ref())?;
    let rows = with_jobs(a.jobs, || {
        bench_records(&g, artifact, &instance, &queries, a.eps, &a.algos)
    })?;
    write_bench_csv(&rows, create_output(&a.out)?)?;
    writeln!(out, "wrote {} rows to {}", rows.len(), a.out.display()).map_err(data("stdout"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthRecord {
    pub schema: String,
    pub spec: SyntheticSpec,
    pub truth: PlantedTruth,
}

fn parse_layout(s: &str) -> Result<RegionLayout, CliError> {
    let bad = || CliError::Usage(format!("bad layout {s:?}; expected blocks:RxC or ids:K"));
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    match kind {
        "blocks" => {
            let (r, c) = rest.split_once('x').ok_or_else(bad)?;
            Ok(RegionLayout::Blocks {
                rows: r.parse().map_err(|_| bad())?,
                cols: c.parse().map_err(|_| bad())?,
            })
        }
        "ids" => Ok(RegionLayout::IdRanges {
            count: rest.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut spec = SyntheticSpec::grid(a.rows, a.cols, a.lines, a.delta_plant, a.seed);
    if let Some(n) = a.regular {
        spec.topology = Topology::RandomRegular {
            n_vertices: n,
            degree: a.degree,
        };
        spec.region_layout = RegionLayout::IdRanges { count: a.lines };
    }
    if let Some(l) = &a.layout {
        spec.region_layout = parse_layout(l)?;
    }
    let (g, truth) = generate_synthetic(&spec).map_err(data("generate"))?;
    let mut w = create_output(&a.out)?;
    write_graph(&g, &mut w).map_err(data("write graph"))?;
    w.flush().map_err(data("write graph"))?;
    if let Some(p) = &a.truth {
        let mut w = create_output(p)?;
        write_json(
            &TruthRecord {
                schema: TRUTH_SCHEMA.into(),
                spec,
                truth,
            },
            &mut w,
        )?;
        w.flush().map_err(data("write truth"))?;
    }
    writeln!(
        out,
        "wrote {} vertices, {} edges to {}",
        g.vertex_count(),
        g.edge_count(),
        a.out.display()
    )
    .map_err(data("stdout"))
}

fn check_nonneg(name: &str, x: f64) -> Result<(), String> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(format!("{name} is negative or NaN: {x}"))
    }
}

fn check_query_record(r: &QueryRecord, schema: &str) -> Result<(), String> {
    if r.schema != schema {
        return Err(format!("schema {:?}, expected {schema:?}", r.schema));
    }
    if !["apex", "gapex", "pe-gapex", "exact"].contains(&r.algorithm.as_str()) {
        return Err(format!("unknown algorithm {:?}", r.algorithm));
    }
    check_nonneg("eps1", r.eps1)?;
    check_nonneg("eps2", r.eps2)?;
    check_nonneg("wall_ms", r.wall_ms)?;
    if let Some(x) = r.speedup_vs_apex {
        check_nonneg("speedup_vs_apex", x)?;
    }
    Ok(())
}

pub fn validate_query_json(text: &str) -> Result<QueryOutput, String> {
    let q: QueryOutput = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if q.schema != QUERY_SCHEMA {
        return Err(format!("schema {:?}, expected {QUERY_SCHEMA:?}", q.schema));
    }
    check_query_record(&q.record, QUERY_SCHEMA)?;
    if q.record.solutions != q.solutions.len() as u64 {
        return Err("solution count does not match the solution list".into());
    }
    for s in &q.solutions {
        for x in [s.cost.c1, s.cost.c2, s.apex.c1, s.apex.c2] {
            check_nonneg("cost", x)?;
        }
        if s.apex.c1 > s.cost.c1 || s.apex.c2 > s.cost.c2 {
            return Err("apex exceeds its representative cost".into());
        }
    }
    Ok(q)
}

pub fn validate_preprocess_json(text: &str) -> Result<PreprocessRecord, String> {
    let r: PreprocessRecord = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if r.schema != PREPROCESS_SCHEMA {
        return Err(format!("schema {:?}, expected {PREPROCESS_SCHEMA:?}", r.schema));
    }
    for (name, x) in [
        ("delta", r.delta),
        ("eps1", r.eps1),
        ("eps2", r.eps2),
        ("wall_s", r.report.wall_s),
        ("branching_original", r.report.branching_original),
        ("branching_query", r.report.branching_query),
    ] {
        check_nonneg(name, x)?;
    }
    if r.report.query_vertices > r.report.vertices {
        return Err("query graph has more vertices than the graph".into());
    }
    Ok(r)
}

pub fn validate_bench_csv<R: std::io::Read>(r: R) -> Result<Vec<QueryRecord>, String> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(BENCH_HEADER.iter().copied()) {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut rows = Vec::new();
    for rec in rd.deserialize::<QueryRecord>() {
        let rec = rec.map_err(|e| e.to_string())?;
        check_query_record(&rec, BENCH_SCHEMA)?;
        rows.push(rec);
    }
    Ok(rows)
}

/// Validates one file by extension and, for JSON, by its `schema` field.
pub fn validate_file(p: &Path) -> Result<String, String> {
    let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
    if p.extension().is_some_and(|e| e == "csv") {
        let rows = validate_bench_csv(text.as_bytes())?;
        return Ok(format!("{BENCH_SCHEMA}, {} rows", rows.len()));
    }
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    match v.get("schema").and_then(|s| s.as_str()) {
        Some(QUERY_SCHEMA) => {
            validate_query_json(&text).map(|q| format!("{QUERY_SCHEMA}, {} solutions", q.solutions.len()))
        }
        Some(PREPROCESS_SCHEMA) => validate_preprocess_json(&text).map(|_| PREPROCESS_SCHEMA.to_string()),
        Some(TRUTH_SCHEMA) => serde_json::from_str::<TruthRecord>(&text)
            .map(|_| TRUTH_SCHEMA.to_string())
            .map_err(|e| e.to_string()),
        Some(s) => Err(format!("unknown schema {s:?}")),
        None => Err("no schema field".into()),
    }
}

/// Generate, preprocess, query and bench a small instance in memory, checking
/// each output against its schema and the pipeline result against the exact frontier.
pub fn smoke_test() -> Result<Vec<String>, String> {
    let mut log = Vec::new();
    let spec = SyntheticSpec::grid(14, 14, 2, 0.01, 7);
    let (g, _) = generate_synthetic(&spec).map_err(|e| e.to_string())?;
    log.push(format!(
        "generated {} vertices, {} edges",
        g.vertex_count(),
        g.edge_count()
    ));
    let eps = Eps::uniform(0.05);
    let pre = preprocess(&g, &PreprocParams::new(0.02, eps)).map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    save_artifact(&pre.artifact, &mut bytes).map_err(|e| e.to_string())?;
    let artifact = load_artifact(bytes.as_slice()).map_err(|e| e.to_string())?;
    let rec = PreprocessRecord {
        schema: PREPROCESS_SCHEMA.into(),
        instance: "smoke".into(),
        delta: 0.02,
        eps1: eps.e1,
        eps2: eps.e2,
        artifact_bytes: bytes.len() as u64,
        report: pre.report,
    };
    validate_preprocess_json(&serde_json::to_string(&rec).map_err(|e| e.to_string())?)?;
    log.push(format!(
        "preprocess: {} clusters, {} super-edges",
        rec.report.clusters, rec.report.super_edges
    ));

    let runner = Runner::new(&g, Some(artifact.clone())).map_err(|e| e.to_string())?;
    let (s, t) = (0u32, g.vertex_count() as u32 - 1);
    let exact = runner.run(Algo::Exact, s, t, eps, true).map_err(|e| e.to_string())?;
    for algo in [Algo::Apex, Algo::Gapex, Algo::PeGapex] {
        let r = runner.run(algo, s, t, eps, true).map_err(|e| e.to_string())?;
        let out = QueryOutput {
            schema: QUERY_SCHEMA.into(),
            record: record("smoke", s, t, eps, algo, &r),
            solutions: r.solutions,
        };
        validate_query_json(&serde_json::to_string(&out).map_err(|e| e.to_string())?)?;
        for p in &exact.solutions {
            let covered = out
                .solutions
                .iter()
                .any(|q| q.vertices.is_some() && eps_dominates_tol(q.cost, p.cost, eps, 1e-9));
            if !covered {
                return Err(format!("{}: exact cost {:?} not covered", algo.name(), p.cost));
            }
        }
        log.push(format!("{}: {} solutions", algo.name(), out.solutions.len()));
    }

    let rows = bench_records(
        &g,
        Some(artifact),
        "smoke",
        &[(s, t), (t, s)],
        eps,
        &[Algo::Apex, Algo::PeGapex],
    )
    .map_err(|e| e.to_string())?;
    let mut csv_bytes = Vec::new();
    write_bench_csv(&rows, &mut csv_bytes).map_err(|e| e.to_string())?;
    let back = validate_bench_csv(csv_bytes.as_slice())?;
    if back.len() != 4 {
        return Err(format!("bench: expected 4 rows, got {}", back.len()));
    }
    log.push(format!("bench: {} rows", back.len()));
    Ok(log)
}

fn cmd_self_check(a: &SelfCheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(data("stdout"));
    if a.files.is_empty() {
        let log = smoke_test().map_err(|e| CliError::Data(format!("smoke test failed: {e}")))?;
        for l in log {
            w(out, l)?;
        }
        return w(out, "self-check ok".into());
    }
    let mut failed = 0;
    for f in &a.files {
        let p = resolve_input(f);
        match validate_file(&p) {
            Ok(msg) => w(out, format!("ok   {}: {msg}", p.display()))?,
            Err(e) => {
                failed += 1;
                w(out, format!("FAIL {}: {e}", p.display()))?;
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Data(format!("{failed} file(s) failed validation")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("corrpath").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn eps_accepts_one_or_two_values() {
        assert_eq!(parse_eps("0.1").unwrap(), Eps::uniform(0.1));
        assert_eq!(parse_eps("0.1,0.2").unwrap(), Eps::new(0.1, 0.2));
        assert!(parse_eps("-1").is_err());
        assert!(parse_eps("1,2,3").is_err());
    }

    #[test]
    fn query_file_comments_and_errors() {
        let q = parse_query_file("# header\n0 5\n\n 3 4 # trailing\n".as_bytes()).unwrap();
        assert_eq!(q, vec![(0, 5), (3, 4)]);
        let e = parse_query_file("0 5\n1\n".as_bytes()).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_DATA);
        assert!(e.to_string().contains("line 2"));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&[]).0, EXIT_USAGE);
        assert_eq!(run_args(&["query", "g.txt"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_file_exits_3() {
        let (code, _, err) = run_args(&[
            "query",
            "/nonexistent/g.txt",
            "-s",
            "0",
            "-t",
            "1",
            "--eps",
            "0",
            "--algo",
            "exact",
        ]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.contains("nonexistent"));
    }

    #[test]
    fn layout_parsing() {
        assert_eq!(
            parse_layout("blocks:2x3").unwrap(),
            RegionLayout::Blocks { rows: 2, cols: 3 }
        );
        assert_eq!(parse_layout("ids:4").unwrap(), RegionLayout::IdRanges { count: 4 });
        assert!(parse_layout("stripes:2").is_err());
    }

    #[test]
    fn smoke_pipeline_passes() {
        let log = smoke_test().unwrap();
        assert!(log.iter().any(|l| l.starts_with("bench")));
    }

    #[test]
    fn bench_csv_round_trips() {
        let rec = QueryRecord {
            schema: QUERY_SCHEMA.into(),
            instance: "x".into(),
            s: 1,
            t: 2,
            eps1: 0.1,
            eps2: 0.2,
            algorithm: "apex".into(),
            solutions: 3,
            expansions: 4,
            generations: 5,
            open_peak: 6,
            merges: 7,
            super_generated: 0,
            super_inserted: 0,
            graph_vertices: 9,
            graph_edges: 10,
            wall_ms: 1.5,
            speedup_vs_apex: Some(1.0),
        };
        let mut other = rec.clone();
        other.speedup_vs_apex = None;
        let mut buf = Vec::new();
        write_bench_csv(&[rec.clone(), other.clone()], &mut buf).unwrap();
        let back = validate_bench_csv(buf.as_slice()).unwrap();
        assert_eq!(
            back[0],
            QueryRecord {
                schema: BENCH_SCHEMA.into(),
                ..rec
            }
        );
        assert_eq!(back[1].speedup_vs_apex, None);
        let mut empty = Vec::new();
        write_bench_csv(&[], &mut empty).unwrap();
        assert!(validate_bench_csv(empty.as_slice()).unwrap().is_empty());
    }
}
