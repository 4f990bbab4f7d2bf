//! Command-line front end: generation, building, querying, verification, and
//! probe-count measurement over the text formats described in the README.
//! Exit codes: 0 on success, 1 when a verify run finds violations, 2 on bad
//! input or usage.

use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ftspt::generators::{adversarial_failure_set, gen_lower_bound, gen_random};
use ftspt::graph::{format_graph, parse_graph, Graph, VertexId};
use ftspt::msf_oracle::{build_oracle, parse_batch, recompute_msf, MstDelta, UpdateBatch};
use ftspt::reference::{audit_stretch, exact_distance, FailureSampler};
use ftspt::ssdo::{build_ssdo, build_ssdo_any_f, parse_queries, Ssdo};

#[derive(Parser)]
#[command(name = "ftspt", version, about = "fault tolerant shortest-path structures")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a graph in the text format
    #[command(subcommand)]
    Gen(GenCmd),
    /// Build the sparse structure and print its shape
    Build(BuildArgs),
    /// Answer queries from a file
    #[command(subcommand)]
    Query(QueryCmd),
    /// Check answers against exact recomputation
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Probe-counter averages as CSV
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum GenCmd {
    /// Seeded random graph with uniform weights
    Random(GenRandomArgs),
    /// Girth-four detour family with its source vertex
    Lowerbound(GenLowerboundArgs),
}

#[derive(Args)]
struct GenRandomArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0.5)]
    w_lo: f64,
    #[arg(long, default_value_t = 9.5)]
    w_hi: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenLowerboundArgs {
    /// Half the number of core vertices; at least 2
    #[arg(long)]
    a: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    graph: PathBuf,
    /// 1-based source vertex; defaults to the file's `s` line
    #[arg(long)]
    source: Option<u32>,
    /// Supported number of simultaneous edge failures
    #[arg(long, required_unless_present = "unbounded", conflicts_with = "unbounded")]
    budget: Option<usize>,
    /// Keep peeling layers until the graph is exhausted
    #[arg(long)]
    unbounded: bool,
    /// Also list the edge ids of every layer
    #[arg(long)]
    layers: bool,
}

#[derive(Subcommand)]
enum QueryCmd {
    /// Post-failure distances and paths from the source
    Ssdo(QuerySsdoArgs),
    /// Forest delta for one update batch
    Msf(QueryMsfArgs),
}

#[derive(Args)]
struct QuerySsdoArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    source: Option<u32>,
    #[arg(long, required_unless_present = "unbounded", conflicts_with = "unbounded")]
    budget: Option<usize>,
    #[arg(long)]
    unbounded: bool,
    /// Query file: `f <edge ids>` sets failures, `t <vertex>` asks
    #[arg(long)]
    queries: PathBuf,
}

#[derive(Args)]
struct QueryMsfArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Batch file: `d <u> <v>`, `i <u> <v> <w>`, `c <u> <v> <w>`
    #[arg(long)]
    batch: PathBuf,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Replay sampled failure sets against exact distances
    Stretch(VerifyStretchArgs),
    /// Random update batches against from-scratch forests
    Msf(VerifyMsfArgs),
    /// The dropped-edge detour family at its forced ratio
    Lowerbound(VerifyLowerboundArgs),
}

#[derive(Args)]
struct VerifyStretchArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    source: Option<u32>,
    #[arg(long, required_unless_present = "unbounded", conflicts_with = "unbounded")]
    budget: Option<usize>,
    #[arg(long)]
    unbounded: bool,
    /// Largest failure set to sample; defaults to the budget (or 2)
    #[arg(long)]
    max_size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random sets per size when the pool is too big to enumerate
    #[arg(long, default_value_t = 500)]
    per_size: usize,
    /// Write the per-query table here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyMsfArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 8)]
    k_max: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct VerifyLowerboundArgs {
    #[arg(long)]
    a: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Graph sizes, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = [2000u32])]
    ns: Vec<u32>,
    /// Batch sizes, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8])]
    ks: Vec<usize>,
    #[arg(long, default_value_t = 25)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<u8, String> {
    match cmd {
        Cmd::Gen(GenCmd::Random(a)) => {
            let g = gen_random(a.n, a.m, a.w_lo, a.w_hi, a.seed).map_err(|e| e.to_string())?;
            emit(a.out.as_deref(), &format_graph(&g, None))?;
            Ok(0)
        }
        Cmd::Gen(GenCmd::Lowerbound(a)) => {
            let inst = gen_lower_bound(a.a).map_err(|e| e.to_string())?;
            emit(a.out.as_deref(), &format_graph(&inst.graph, Some(inst.s)))?;
            Ok(0)
        }
        Cmd::Build(a) => cmd_build(a),
        Cmd::Query(QueryCmd::Ssdo(a)) => cmd_query_ssdo(a),
        Cmd::Query(QueryCmd::Msf(a)) => cmd_query_msf(a),
        Cmd::Verify(VerifyCmd::Stretch(a)) => cmd_verify_stretch(a),
        Cmd::Verify(VerifyCmd::Msf(a)) => cmd_verify_msf(a),
        Cmd::Verify(VerifyCmd::Lowerbound(a)) => cmd_verify_lowerbound(a),
        Cmd::Bench(a) => cmd_bench(a),
    }
}

fn emit(out: Option<&std::path::Path>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_graph(path: &std::path::Path) -> Result<(Graph, Option<VertexId>), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_graph(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn resolve_source(flag: Option<u32>, file: Option<VertexId>) -> Result<VertexId, String> {
    match flag {
        Some(0) => Err("source vertices are numbered from 1".into()),
        Some(s) => Ok(s - 1),
        None => file.ok_or_else(|| "no source: pass --source or add an `s` line".into()),
    }
}

fn build_structure(
    g: &Graph,
    source: VertexId,
    budget: Option<usize>,
    unbounded: bool,
) -> Result<Ssdo, String> {
    let built = if unbounded {
        build_ssdo_any_f(g, source)
    } else {
        build_ssdo(g, source, budget.expect("clap enforces budget or unbounded"))
    };
    built.map_err(|e| e.to_string())
}

fn cmd_build(a: BuildArgs) -> Result<u8, String> {
    let (g, file_source) = load_graph(&a.graph)?;
    let s = resolve_source(a.source, file_source)?;
    let o = build_structure(&g, s, a.budget, a.unbounded)?;
    println!("h_edges {}", o.ft.h_edges.len());
    let sizes: Vec<String> = o.ft.layers.iter().map(|l| l.len().to_string()).collect();
    println!("layer_sizes {}", sizes.join(" "));
    if a.layers {
        for (i, layer) in o.ft.layers.iter().enumerate() {
            let ids: Vec<String> = layer.iter().map(|id| id.to_string()).collect();
            println!("layer {i}: {}", ids.join(" "));
        }
    }
    Ok(0)
}

fn cmd_query_ssdo(a: QuerySsdoArgs) -> Result<u8, String> {
    let (g, file_source) = load_graph(&a.graph)?;
    let s = resolve_source(a.source, file_source)?;
    let o = build_structure(&g, s, a.budget, a.unbounded)?;
    let text = fs::read_to_string(&a.queries).map_err(|e| format!("{}: {e}", a.queries.display()))?;
    let specs = parse_queries(&text).map_err(|e| format!("{}: {e}", a.queries.display()))?;

    let mut cached: Option<(Vec<u32>, ftspt::ssdo::SsdoSession)> = None;
    for spec in &specs {
        let reuse = cached.as_ref().is_some_and(|(fs, _)| *fs == spec.failures);
        if !reuse {
            let session = o.session(&spec.failures).map_err(|e| e.to_string())?;
            cached = Some((spec.failures.clone(), session));
        }
        let session = &mut cached.as_mut().expect("just filled").1;
        match session.path(spec.target) {
            Some(p) => {
                println!("dist {}", p.total);
                let verts: Vec<String> = p.vertices.iter().map(|v| (v + 1).to_string()).collect();
                println!("path {}", verts.join(" "));
            }
            None => {
                println!("dist inf");
                println!("path -");
            }
        }
    }
    Ok(0)
}

fn format_delta_side(label: &str, side: &[ftspt::msf_oracle::EdgeRef]) -> String {
    let mut line = String::from(label);
    line.push(':');
    for e in side {
        line.push_str(&format!(" {}({}-{},{})", e.id, e.u + 1, e.v + 1, e.weight));
    }
    line
}

fn cmd_query_msf(a: QueryMsfArgs) -> Result<u8, String> {
    let (g, _) = load_graph(&a.graph)?;
    let oracle = build_oracle(&g).map_err(|e| e.to_string())?;
    let text = fs::read_to_string(&a.batch).map_err(|e| format!("{}: {e}", a.batch.display()))?;
    let batch = parse_batch(&text, &g).map_err(|e| format!("{}: {e}", a.batch.display()))?;
    let delta = oracle.query(&batch).map_err(|e| e.to_string())?;
    println!("{}", format_delta_side("removed", &delta.removed));
    println!("{}", format_delta_side("added", &delta.added));
    Ok(0)
}

fn cmd_verify_stretch(a: VerifyStretchArgs) -> Result<u8, String> {
    let (g, file_source) = load_graph(&a.graph)?;
    let s = resolve_source(a.source, file_source)?;
    let o = build_structure(&g, s, a.budget, a.unbounded)?;
    let max_size = a.max_size.unwrap_or_else(|| a.budget.unwrap_or(2));
    if let Some(b) = a.budget {
        if max_size > b {
            return Err(format!("max size {max_size} exceeds the budget {b}"));
        }
    }
    let sampler =
        FailureSampler::new(o.ft.h_edges.clone(), max_size, a.seed).with_random_per_size(a.per_size);
    let report = audit_stretch(&o, &sampler, a.csv.is_some());
    if let Some(path) = &a.csv {
        fs::write(path, report.to_csv()).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    println!("samples {}", report.samples);
    println!("max_ratio {}", report.max_ratio);
    println!("violations {}", report.violations.len());
    for v in report.violations.iter().take(10) {
        eprintln!("violation: {v}");
    }
    Ok(u8::from(!report.ok()))
}

fn delta_matches_scratch(base_msf: &[u32], delta: &MstDelta, scratch: &[u32]) -> bool {
    let mut set: HashSet<u32> = base_msf.iter().copied().collect();
    for id in delta.removed_ids() {
        if !set.remove(&id) {
            return false;
        }
    }
    for id in delta.added_ids() {
        if !set.insert(id) {
            return false;
        }
    }
    let scratch_set: HashSet<u32> = scratch.iter().copied().collect();
    set == scratch_set
}

fn cmd_verify_msf(a: VerifyMsfArgs) -> Result<u8, String> {
    let (g, _) = load_graph(&a.graph)?;
    let oracle = build_oracle(&g).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut mismatches = 0usize;
    for _ in 0..a.trials {
        let k = rng.gen_range(1..=a.k_max.max(1));
        let mut batch = UpdateBatch::default();
        let mut used: HashSet<u32> = HashSet::new();
        for _ in 0..k {
            let roll = rng.gen_range(0..10u32);
            if roll < 6 || g.n() < 3 {
                for _ in 0..64 {
                    let id = rng.gen_range(0..g.m() as u32);
                    if used.insert(id) {
                        batch.deletions.push(id);
                        break;
                    }
                }
            } else if roll < 8 {
                for _ in 0..64 {
                    let u = rng.gen_range(0..g.n());
                    let v = rng.gen_range(0..g.n());
                    if u != v && g.edge_between(u, v).is_none() {
                        batch.insertions.push((u, v, rng.gen_range(1..=19) as f64 * 0.5));
                        break;
                    }
                }
            } else {
                for _ in 0..64 {
                    let id = rng.gen_range(0..g.m() as u32);
                    if used.insert(id) {
                        batch.weight_changes.push((id, rng.gen_range(1..=19) as f64 * 0.5));
                        break;
                    }
                }
            }
        }
        let delta = oracle.query(&batch).map_err(|e| e.to_string())?;
        let (scratch, _) = recompute_msf(&g, &batch).map_err(|e| e.to_string())?;
        if !delta_matches_scratch(oracle.base_msf(), &delta, &scratch)
            || delta.removed.len() > batch.k()
            || delta.added.len() > batch.k()
        {
            mismatches += 1;
        }
    }
    println!("trials {}", a.trials);
    println!("mismatches {mismatches}");
    Ok(u8::from(mismatches > 0))
}

fn cmd_verify_lowerbound(a: VerifyLowerboundArgs) -> Result<u8, String> {
    const REL: f64 = 1e-9;
    let inst = gen_lower_bound(a.a).map_err(|e| e.to_string())?;
    let g = &inst.graph;
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut min_forced = f64::INFINITY;
    let mut max_dev = 0.0f64;
    for &e in &inst.core_edges {
        let fset = adversarial_failure_set(&inst, e).map_err(|err| err.to_string())?;
        let edge = g.edge(e);
        let target = edge.u.max(edge.v);
        let intact = exact_distance(g, &fset, inst.s, target);
        let mut with_e = fset.clone();
        with_e.push(e);
        let forced = exact_distance(g, &with_e, inst.s, target);
        checked += 1;
        let ratio = forced / intact;
        let dev = (intact / 2.0 - 1.0).abs();
        min_forced = min_forced.min(ratio);
        max_dev = max_dev.max(dev);
        if !(ratio >= 2.0 - REL) || dev > REL {
            violations += 1;
        }
    }
    println!("checked {checked}");
    println!("min_forced_ratio {min_forced}");
    println!("max_intact_deviation {max_dev}");
    println!("violations {violations}");
    Ok(u8::from(violations > 0))
}

fn cmd_bench(a: BenchArgs) -> Result<u8, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    println!("n,k,avg_probes,avg_edge_touches");
    for &n in &a.ns {
        let g = gen_random(n, 4 * n as usize, 0.5, 9.5, a.seed ^ u64::from(n))
            .map_err(|e| e.to_string())?;
        let oracle = build_oracle(&g).map_err(|e| e.to_string())?;
        let base: Vec<u32> = oracle.base_msf().to_vec();
        for &k in &a.ks {
            if k == 0 || k > base.len() {
                return Err(format!("batch size {k} is unusable at n = {n}"));
            }
            let mut probes = 0u64;
            let mut touches = 0u64;
            for _ in 0..a.queries {
                let mut dels: HashSet<u32> = HashSet::new();
                while dels.len() < k {
                    dels.insert(base[rng.gen_range(0..base.len())]);
                }
                let ids: Vec<u32> = dels.iter().copied().collect();
                let (_, stats) = oracle
                    .query_with_stats(&UpdateBatch::deletions_only(&ids))
                    .map_err(|e| e.to_string())?;
                probes += stats.probes();
                touches += stats.edge_touches();
            }
            let q = a.queries.max(1) as f64;
            println!(
                "{n},{k},{:.1},{:.1}",
                probes as f64 / q,
                touches as f64 / q
            );
        }
    }
    Ok(0)
}
