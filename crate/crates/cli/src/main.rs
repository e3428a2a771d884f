mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use annlayout::adapter::{self, GraphFormat, IngestOptions};
use annlayout::analyzer;
use annlayout::bench::{self, SweepConfig};
use annlayout::construct::{self, BuildParams, Builder};
use annlayout::dataset_io::{self, Distribution, IntMatrix, SyntheticSpec, VectorFormat};
use annlayout::reorder::{self, HubThreshold, ReorderAlgorithm, ReorderSpec};
use annlayout::search::{EntryPoints, Executor, SearchParams};
use annlayout::{apply_permutation, GroundTruth, Metric, VectorDataset, Vectors};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use config::BenchConfig;
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "annlayout", version, about = "Graph ANN indexes, memory-layout reorderings and throughput benchmarks")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Generate a seeded synthetic database and query set.
    Synth(SynthArgs),
    /// Compute exact top-k ground truth as ivecs.
    Gt(GtArgs),
    /// Build a fixed-degree graph index.
    Build(BuildArgs),
    /// Convert an external graph file into the fixed-degree layout.
    Adapt(AdaptArgs),
    /// Compute a reordering and write the permutation and relabeled graph.
    Reorder(ReorderArgs),
    /// Run beam search for a query file.
    Search(SearchArgs),
    /// Structural report of a graph.
    Analyze(AnalyzeArgs),
    /// Recall/QPS sweep over layouts from a config file.
    Bench(BenchArgs),
    /// Re-run a command from a saved manifest.
    Replay(ReplayArgs),
}

/// A vector file and its encoding; the encoding is guessed from the
/// extension when omitted (fvecs otherwise).
fn resolve_format(path: &Path, format: &mut Option<VectorFormat>) -> VectorFormat {
    *format.get_or_insert_with(|| VectorFormat::from_path(path).unwrap_or(VectorFormat::Fvecs))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    query_seed: u64,
    #[arg(long, default_value_t = 100)]
    n_queries: usize,
    #[arg(long, default_value = "uniform")]
    distribution: Distribution,
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    format: Option<VectorFormat>,
    #[arg(long)]
    out_base: PathBuf,
    #[arg(long)]
    out_queries: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct GtArgs {
    #[arg(long)]
    base: PathBuf,
    #[arg(long)]
    base_format: Option<VectorFormat>,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    queries_format: Option<VectorFormat>,
    #[arg(long, default_value = "l2")]
    metric: Metric,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct BuildArgs {
    #[arg(long)]
    base: PathBuf,
    #[arg(long)]
    base_format: Option<VectorFormat>,
    #[arg(long, default_value = "l2")]
    metric: Metric,
    #[arg(long, default_value = "nn-descent")]
    builder: Builder,
    #[arg(long, default_value_t = construct::DEFAULT_K_MAX)]
    k_max: usize,
    #[arg(long, default_value_t = 1.0)]
    sample_rate: f64,
    #[arg(long, default_value_t = 10)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.001)]
    delta: f64,
    #[arg(long, default_value_t = 1.2)]
    alpha: f32,
    #[arg(long, default_value_t = 64)]
    beam: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct AdaptArgs {
    #[arg(long)]
    input: PathBuf,
    /// adjlist-text | csr-bin | fixed-bin
    #[arg(long)]
    from: GraphFormat,
    #[arg(long, default_value = "fixed-bin")]
    to: GraphFormat,
    /// Slots per row (default: largest degree in the input).
    #[arg(long)]
    k_cap: Option<usize>,
    /// Keep the first `k_cap` neighbors of longer rows instead of failing.
    #[arg(long)]
    truncate: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct ReorderArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    algo: ReorderAlgorithm,
    #[arg(long, default_value_t = reorder::DEFAULT_GORDER_WINDOW)]
    window: usize,
    /// Hub in-degree threshold (default: mean in-degree).
    #[arg(long)]
    hub_threshold: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_perm: PathBuf,
    #[arg(long)]
    out_graph: PathBuf,
    /// Also relabel this dataset.
    #[arg(long, requires = "out_base")]
    base: Option<PathBuf>,
    #[arg(long)]
    base_format: Option<VectorFormat>,
    #[arg(long)]
    out_base: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SearchArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    base: PathBuf,
    #[arg(long)]
    base_format: Option<VectorFormat>,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    queries_format: Option<VectorFormat>,
    #[arg(long, default_value = "l2")]
    metric: Metric,
    #[arg(long)]
    l: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Comma-separated entry vertices (default: random draw).
    #[arg(long, value_delimiter = ',')]
    entry: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    random_entries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct AnalyzeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct BenchArgs {
    /// TOML or JSON run config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    l_grid: Option<Vec<usize>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated reorderings replacing the configured list.
    #[arg(long, value_delimiter = ',')]
    reorder: Option<Vec<ReorderAlgorithm>>,
    /// Allow layouts whose results differ from the baseline's.
    #[arg(long)]
    no_strict: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

/// Written next to every output: the resolved invocation, so replaying it
/// regenerates the same non-timing outputs.
#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    host: String,
    workers: Option<usize>,
    invocation: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    resolved_config: Option<BenchConfig>,
    #[serde(default)]
    outputs: serde_json::Value,
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

struct Ctx {
    workers: Option<usize>,
    exec: Executor,
}

impl Ctx {
    fn manifest(&self, invocation: &Command, resolved: Option<BenchConfig>, outputs: serde_json::Value) -> Manifest {
        Manifest {
            tool: "annlayout".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            host: bench::host_info(),
            workers: self.workers,
            invocation: invocation.clone(),
            resolved_config: resolved,
            outputs,
        }
    }
}

fn load_vectors(path: &Path, format: &mut Option<VectorFormat>) -> CliResult<Vectors> {
    let f = resolve_format(path, format);
    Ok(dataset_io::read_vectors(path, f)?)
}

fn run(ctx: &Ctx, cmd: Command, resolved_bench: Option<BenchConfig>) -> CliResult<()> {
    match cmd {
        Command::Synth(mut a) => {
            let format = resolve_format(&a.out_base, &mut a.format);
            let mut spec = SyntheticSpec::new(a.n, a.d, a.seed, a.query_seed, a.n_queries);
            spec.distribution = a.distribution;
            spec.normalize = a.normalize;
            let (ds, queries) = dataset_io::generate_synthetic(&spec, Metric::L2)?;
            dataset_io::write_vectors(&a.out_base, ds.vectors(), format)?;
            dataset_io::write_vectors(&a.out_queries, &queries, format)?;
            let out = a.out_base.clone();
            let m = ctx.manifest(&Command::Synth(a), None, serde_json::json!({ "spec": spec }));
            write_json(&manifest_path(&out), &m)
        }
        Command::Gt(mut a) => {
            let base = load_vectors(&a.base, &mut a.base_format)?;
            let queries = load_vectors(&a.queries, &mut a.queries_format)?;
            let ds = VectorDataset::new(base, a.metric);
            let gt = ctx.exec.install(|| dataset_io::exact_ground_truth(&ds, &queries, a.k))?;
            dataset_io::write_ivecs(&a.out, &IntMatrix::from(&gt))?;
            let out = a.out.clone();
            write_json(&manifest_path(&out), &ctx.manifest(&Command::Gt(a), None, serde_json::Value::Null))
        }
        Command::Build(mut a) => {
            let base = load_vectors(&a.base, &mut a.base_format)?;
            let ds = VectorDataset::new(base, a.metric);
            let params = BuildParams {
                k_max: a.k_max,
                sample_rate: a.sample_rate,
                max_iters: a.max_iters,
                convergence_delta: a.delta,
                alpha: a.alpha,
                build_beam_width: a.beam,
                seed: a.seed,
            };
            let built = ctx.exec.install(|| construct::build(a.builder, &ds, &params))?;
            adapter::serialize(&built.graph, &a.out)?;
            let outputs = serde_json::json!({
                "build_params": params,
                "entry_points": built.entry_points,
                "edges": built.graph.edge_count(),
            });
            let out = a.out.clone();
            write_json(&manifest_path(&out), &ctx.manifest(&Command::Build(a), None, outputs))
        }
        Command::Adapt(a) => {
            let opts = IngestOptions {
                k_cap: a.k_cap,
                truncate: a.truncate,
            };
            let (g, report) = adapter::ingest(&a.input, a.from, opts)?;
            adapter::write_graph(&g, &a.out, a.to)?;
            println!("{}", serde_json::to_string(&report)?);
            let out = a.out.clone();
            let outputs = serde_json::json!({ "report": report, "lossless": report.is_lossless() });
            write_json(&manifest_path(&out), &ctx.manifest(&Command::Adapt(a), None, outputs))
        }
        Command::Reorder(mut a) => {
            let g = adapter::read_fixed(&a.graph)?;
            let spec = ReorderSpec {
                algorithm: a.algo,
                window: a.window,
                hub_threshold: a.hub_threshold.map_or(HubThreshold::MeanInDegree, HubThreshold::Value),
                seed: a.seed,
            };
            let perm = ctx.exec.install(|| spec.compute(&g))?;
            reorder::write_perm(&a.out_perm, &perm)?;
            if let (Some(base), Some(out_base)) = (a.base.clone(), a.out_base.clone()) {
                let format = resolve_format(&base, &mut a.base_format);
                let ds = VectorDataset::new(dataset_io::read_vectors(&base, format)?, Metric::L2);
                let (pg, pds) = apply_permutation(&g, &ds, &perm)?;
                adapter::serialize(&pg, &a.out_graph)?;
                dataset_io::write_vectors(&out_base, pds.vectors(), format)?;
            } else {
                adapter::serialize(&g.permuted(&perm)?, &a.out_graph)?;
            }
            let outputs = serde_json::json!({
                "spec": spec,
                "bandwidth_before": analyzer::bandwidth(&g, None),
                "bandwidth_after": analyzer::bandwidth(&g, Some(&perm)),
            });
            let out = a.out_graph.clone();
            write_json(&manifest_path(&out), &ctx.manifest(&Command::Reorder(a), None, outputs))
        }
        Command::Search(mut a) => {
            let g = adapter::read_fixed(&a.graph)?;
            let base = load_vectors(&a.base, &mut a.base_format)?;
            let queries = load_vectors(&a.queries, &mut a.queries_format)?;
            let ds = VectorDataset::new(base, a.metric);
            let entry = if a.entry.is_empty() {
                EntryPoints::Random { count: a.random_entries }
            } else {
                EntryPoints::Fixed(a.entry.clone())
            };
            let params = SearchParams {
                l: a.l,
                k: a.k,
                entry,
                seed: a.seed,
                max_iterations: a.max_iterations,
            };
            let results = ctx.exec.batch_search(&g, &ds, &queries, &params)?;
            write_json(&a.out, &serde_json::json!({ "params": params, "results": results }))?;
            let out = a.out.clone();
            write_json(&manifest_path(&out), &ctx.manifest(&Command::Search(a), None, serde_json::Value::Null))
        }
        Command::Analyze(a) => {
            let g = adapter::read_fixed(&a.graph)?;
            let report = analyzer::analyze(&g);
            std::fs::write(&a.out, report.to_json()? + "\n")?;
            let out = a.out.clone();
            write_json(&manifest_path(&out), &ctx.manifest(&Command::Analyze(a), None, serde_json::Value::Null))
        }
        Command::Bench(a) => {
            let cfg = match resolved_bench {
                Some(cfg) => cfg,
                None => apply_overrides(BenchConfig::load(&a.config)?, &a),
            };
            cfg.validate()?;
            run_bench(ctx, &Command::Bench(a), cfg)
        }
        Command::Replay(a) => {
            let text = std::fs::read_to_string(&a.manifest)?;
            let m: Manifest = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", a.manifest.display())))?;
            if matches!(m.invocation, Command::Replay(_)) {
                return Err(CliError::Config("manifest invokes replay".into()));
            }
            let workers = ctx.workers.or(m.workers);
            let inner = Ctx {
                workers,
                exec: Executor::new(workers)?,
            };
            run(&inner, m.invocation, m.resolved_config)
        }
    }
}

fn apply_overrides(mut cfg: BenchConfig, a: &BenchArgs) -> BenchConfig {
    if let Some(d) = &a.out_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(l) = &a.l_grid {
        cfg.l_grid = l.clone();
    }
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = &a.reorder {
        cfg.reorders = r.iter().copied().map(ReorderSpec::new).collect();
    }
    if a.no_strict {
        cfg.strict_equivalence = false;
    }
    cfg
}

fn sweep_template(cfg: &BenchConfig, index_label: &str, dataset_label: &str, entry: EntryPoints) -> SweepConfig {
    SweepConfig {
        index_label: index_label.into(),
        dataset_label: dataset_label.into(),
        l_grid: cfg.l_grid.clone(),
        k: cfg.k,
        trials: cfg.trials,
        entry,
        seed: cfg.seed,
        max_iterations: cfg.max_iterations,
        reorders: cfg.reorders.clone(),
        strict_equivalence: cfg.strict_equivalence,
    }
}

fn write_csv_file<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let f = std::fs::File::create(path)?;
    bench::write_csv(rows, std::io::BufWriter::new(f))?;
    Ok(())
}

fn run_bench(ctx: &Ctx, invocation: &Command, cfg: BenchConfig) -> CliResult<()> {
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir)?;
    let default_entry = match &cfg.entry_points {
        Some(e) => EntryPoints::Fixed(e.clone()),
        None => EntryPoints::Random { count: cfg.random_entries },
    };
    let mut outputs = serde_json::Map::new();
    outputs.insert("speedup_pairing".into(), "equal-L".into());

    if let (Some(dm), Some(qf)) = (&cfg.dataset, &cfg.queries) {
        let ds = dm.load()?;
        let queries = dataset_io::read_vectors(&qf.path, qf.format)?;
        let gt = match &cfg.ground_truth {
            Some(p) => dataset_io::read_ivecs(p)?.to_ground_truth(cfg.k)?,
            None => ctx.exec.install(|| dataset_io::exact_ground_truth(&ds, &queries, cfg.k))?,
        };
        let (graph, built_entry) = match &cfg.graph {
            Some(p) => (adapter::read_fixed(p)?, None),
            None => {
                let built = ctx.exec.install(|| construct::build(cfg.build.builder, &ds, &cfg.build.params))?;
                (built.graph, built.entry_points)
            }
        };
        let entry = match (&cfg.entry_points, built_entry) {
            (None, Some(e)) => EntryPoints::Fixed(e),
            _ => default_entry.clone(),
        };
        let index_label = cfg.index_label.clone().unwrap_or_else(|| cfg.build.builder.to_string());
        let dataset_label = cfg.dataset_label.clone().unwrap_or_else(|| stem(&dm.path));
        let sweep_cfg = sweep_template(&cfg, &index_label, &dataset_label, entry);
        let res = bench::sweep(&ctx.exec, &graph, &ds, &queries, &gt, &sweep_cfg)?;
        let report = analyzer::analyze(&graph);
        write_csv_file(&dir.join("records.csv"), &res.records)?;
        write_csv_file(&dir.join("speedups.csv"), &res.speedups)?;
        let scatter = bench::lcc_scatter(report.average_lcc, &res.speedups);
        write_json(
            &dir.join("results.json"),
            &serde_json::json!({
                "speedup_pairing": "equal-L",
                "sweep": sweep_cfg,
                "graph": report,
                "records": res.records,
                "speedups": res.speedups,
                "recall_qps_curves": bench::recall_qps_curves(&res.records),
                "speedup_curves": bench::speedup_curves(&res.speedups),
                "lcc_scatter": scatter,
            }),
        )?;
        outputs.insert("records".into(), res.records.len().into());
        outputs.insert("ground_truth_k".into(), gt_k(&gt).into());
    }

    if let Some(study) = &cfg.dimension_study {
        let template = sweep_template(&cfg, "", "", default_entry);
        let dcfg = cfg.dimension_sweep_config(study, template);
        let res = bench::dimension_sweep(&ctx.exec, &dcfg)?;
        write_csv_file(&dir.join("dimension_records.csv"), &res.records)?;
        write_csv_file(&dir.join("dimension_points.csv"), &res.points)?;
        std::fs::write(dir.join("correlation.csv"), bench::correlation_table_csv(&res.table))?;
        write_json(&dir.join("dimension.json"), &res)?;
        outputs.insert("dimension_points".into(), res.points.len().into());
    }

    let m = ctx.manifest(invocation, Some(cfg), serde_json::Value::Object(outputs));
    write_json(&dir.join("manifest.json"), &m)
}

fn gt_k(gt: &GroundTruth) -> usize {
    gt.k()
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            let err = CliError::Usage(first);
            eprintln!("{}", err.render());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    let result = Executor::new(cli.workers).map_err(CliError::from).and_then(|exec| {
        let ctx = Ctx {
            workers: cli.workers,
            exec,
        };
        run(&ctx, cli.command, None)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.render());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
