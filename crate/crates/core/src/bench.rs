//! Benchmark harness: recall and throughput measurement, `L` sweeps over
//! reordered copies of an index, paired speed-ups, and the dimensionality
//! study.
//!
//! Only the batch-search region is timed. Every configuration gets one
//! untimed warm-up pass; within a sweep, timed trials are interleaved across
//! configurations (trial 1 of every layout, then trial 2, ...) so that slow
//! drift of the machine does not bias one layout against another.

use std::io::{Read, Write};
use std::time::{Duration, Instant};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analyzer::spearman_rank_correlation;
use crate::construct::{self, BuildParams, Builder};
use crate::dataset_io::{exact_ground_truth, generate_synthetic, Distribution, SyntheticSpec};
use crate::error::{Error, Result};
use crate::graph::{apply_permutation, FixedDegreeGraph, GroundTruth, Metric, Permutation, VectorDataset, Vectors};
use crate::reorder::ReorderSpec;
use crate::search::{EntryPoints, Executor, SearchParams, SearchResult};

/// Candidate-list sizes swept in the reference protocol.
pub const DEFAULT_L_GRID: [usize; 16] = [20, 25, 30, 35, 40, 45, 50, 60, 70, 80, 90, 100, 120, 140, 160, 180];
pub const DEFAULT_TRIALS: usize = 5;
/// Dimensionalities of the synthetic dimensionality study.
pub const DIMENSION_GRID: [usize; 8] = [8, 16, 32, 64, 128, 256, 512, 1024];
pub const BASELINE_LABEL: &str = "baseline";

/// Mean over queries of `|returned top-k ∩ true top-k| / k`.
pub fn recall_at_k(results: &[SearchResult], gt: &GroundTruth, k: usize) -> Result<f64> {
    if results.len() != gt.num_queries() {
        return Err(Error::contract(format!(
            "{} results for {} ground-truth queries",
            results.len(),
            gt.num_queries()
        )));
    }
    if k == 0 || k > gt.k() {
        return Err(Error::contract(format!("k = {k} outside [1, {}]", gt.k())));
    }
    if results.is_empty() {
        return Err(Error::contract("recall over an empty query set"));
    }
    let mut hits = 0usize;
    for (q, r) in results.iter().enumerate() {
        let truth = &gt.ids(q)[..k];
        hits += r.ids.iter().take(k).filter(|id| truth.contains(id)).count();
    }
    Ok(hits as f64 / (k * results.len()) as f64)
}

/// Smallest observable tick of the monotonic clock.
pub fn timer_resolution() -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..100 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min(b - a);
    }
    best
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Raw per-trial wall-clock seconds. Serialized as a `;`-separated string so
/// CSV rows stay flat.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Timings(pub Vec<f64>);

impl Serialize for Timings {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        s.serialize_str(&parts.join(";"))
    }
}

impl<'de> Deserialize<'de> for Timings {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.is_empty() {
            return Ok(Timings(Vec::new()));
        }
        s.split(';')
            .map(|p| p.parse::<f64>().map_err(serde::de::Error::custom))
            .collect::<std::result::Result<_, _>>()
            .map(Timings)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpsMeasurement {
    pub qps: f64,
    pub qps_std: f64,
    pub timings: Timings,
    pub recall: f64,
    pub mean_latency_us: f64,
    pub mean_hops: f64,
    pub mean_distance_evals: f64,
    /// Clock resolution exceeded 1% of some trial's elapsed time.
    pub timer_warning: bool,
}

fn mean_stats(results: &[SearchResult]) -> (f64, f64) {
    let n = results.len().max(1) as f64;
    let hops = results.iter().map(|r| r.stats.hops as f64).sum::<f64>() / n;
    let evals = results.iter().map(|r| r.stats.distance_evals as f64).sum::<f64>() / n;
    (hops, evals)
}

fn summarize(nq: usize, elapsed: &[f64], recall: f64, results: &[SearchResult], resolution: Duration) -> QpsMeasurement {
    let per_trial: Vec<f64> = elapsed.iter().map(|&s| nq as f64 / s.max(f64::MIN_POSITIVE)).collect();
    let (qps, qps_std) = mean_std(&per_trial);
    let (mean_hops, mean_distance_evals) = mean_stats(results);
    let mean_elapsed = elapsed.iter().sum::<f64>() / elapsed.len() as f64;
    QpsMeasurement {
        qps,
        qps_std,
        timings: Timings(elapsed.to_vec()),
        recall,
        mean_latency_us: mean_elapsed / nq as f64 * 1e6,
        mean_hops,
        mean_distance_evals,
        timer_warning: elapsed.iter().any(|&s| resolution.as_secs_f64() > 0.01 * s),
    }
}

fn timed_batch(
    exec: &Executor,
    g: &FixedDegreeGraph,
    ds: &VectorDataset,
    queries: &Vectors,
    params: &SearchParams,
) -> Result<f64> {
    let start = Instant::now();
    let out = exec.batch_search(g, ds, queries, params)?;
    let elapsed = start.elapsed().as_secs_f64();
    std::hint::black_box(out);
    Ok(elapsed)
}

/// One untimed warm-up pass (which also yields recall and traversal stats),
/// then `trials` timed passes over the whole query batch.
pub fn measure_qps(
    exec: &Executor,
    g: &FixedDegreeGraph,
    ds: &VectorDataset,
    queries: &Vectors,
    gt: &GroundTruth,
    params: &SearchParams,
    trials: usize,
) -> Result<QpsMeasurement> {
    if trials == 0 {
        return Err(Error::contract("trials must be at least 1"));
    }
    let warm = exec.batch_search(g, ds, queries, params)?;
    let recall = recall_at_k(&warm, gt, params.k)?;
    let elapsed = (0..trials)
        .map(|_| timed_batch(exec, g, ds, queries, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(queries.len(), &elapsed, recall, &warm, timer_resolution()))
}

/// One `(index, dataset, layout, L)` measurement. Field order is the CSV
/// column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub index: String,
    pub dataset: String,
    pub reorder: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub k: usize,
    pub recall: f64,
    pub qps: f64,
    pub qps_std: f64,
    /// QPS relative to the baseline layout at the same `L`.
    pub speedup: f64,
    pub trials: usize,
    pub mean_latency_us: f64,
    pub mean_hops: f64,
    pub mean_distance_evals: f64,
    /// Per-query result distances equal the baseline's exactly.
    pub matches_baseline: bool,
    pub timer_warning: bool,
    pub timings_s: Timings,
}

/// Speed-up of one layout over the baseline at equal `L`, placed at the
/// baseline's recall for speed-up-vs-recall curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRecord {
    pub index: String,
    pub dataset: String,
    pub reorder: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub baseline_recall: f64,
    pub recall: f64,
    pub speedup: f64,
    /// Relative trial noise of the ratio: `sqrt(cv_base^2 + cv_reordered^2)`.
    pub speedup_rel_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub index_label: String,
    pub dataset_label: String,
    pub l_grid: Vec<usize>,
    pub k: usize,
    pub trials: usize,
    pub entry: EntryPoints,
    pub seed: u64,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    pub reorders: Vec<ReorderSpec>,
    /// Fail the sweep if any layout's per-query result distances differ from
    /// the baseline's. Disable for data with tied distances.
    #[serde(default = "default_true")]
    pub strict_equivalence: bool,
}

fn default_true() -> bool {
    true
}

impl SweepConfig {
    pub fn new(index_label: &str, dataset_label: &str, reorders: Vec<ReorderSpec>) -> Self {
        Self {
            index_label: index_label.into(),
            dataset_label: dataset_label.into(),
            l_grid: DEFAULT_L_GRID.to_vec(),
            k: 10,
            trials: DEFAULT_TRIALS,
            entry: EntryPoints::Random { count: 1 },
            seed: 0,
            max_iterations: None,
            reorders,
            strict_equivalence: true,
        }
    }

    fn params(&self, l: usize) -> SearchParams {
        SearchParams {
            l,
            k: self.k,
            entry: self.entry.clone(),
            seed: self.seed,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<BenchRecord>,
    pub speedups: Vec<SpeedupRecord>,
}

impl SweepResult {
    pub fn max_speedup(&self) -> Option<f64> {
        self.speedups.iter().map(|s| s.speedup).max_by(f64::total_cmp)
    }

    pub fn mean_speedup(&self) -> Option<f64> {
        if self.speedups.is_empty() {
            None
        } else {
            Some(self.speedups.iter().map(|s| s.speedup).sum::<f64>() / self.speedups.len() as f64)
        }
    }
}

struct Layout {
    label: String,
    perm: Permutation,
    graph: FixedDegreeGraph,
    dataset: VectorDataset,
}

struct Warm {
    params: SearchParams,
    recall: f64,
    distances: Vec<Vec<f32>>,
    hops: f64,
    evals: f64,
}

/// Runs the baseline and every reordered layout over the `L` grid.
///
/// Each layout is permuted once; its entry points are the baseline's mapped
/// through the permutation, so its results are the baseline's relabeled.
pub fn sweep(
    exec: &Executor,
    g: &FixedDegreeGraph,
    ds: &VectorDataset,
    queries: &Vectors,
    gt: &GroundTruth,
    cfg: &SweepConfig,
) -> Result<SweepResult> {
    if cfg.trials == 0 {
        return Err(Error::contract("trials must be at least 1"));
    }
    if cfg.l_grid.is_empty() {
        return Err(Error::contract("L grid is empty"));
    }
    let mut layouts = vec![Layout {
        label: BASELINE_LABEL.into(),
        perm: Permutation::identity(g.len()),
        graph: g.clone(),
        dataset: ds.clone(),
    }];
    for spec in &cfg.reorders {
        let perm = spec.compute(g)?;
        let (graph, dataset) = apply_permutation(g, ds, &perm)?;
        layouts.push(Layout {
            label: spec.label(),
            perm,
            graph,
            dataset,
        });
    }

    let resolution = timer_resolution();
    let nq = queries.len();
    let mut out = SweepResult::default();
    for &l in &cfg.l_grid {
        let base_params = cfg.params(l);
        let mut warm = Vec::with_capacity(layouts.len());
        for layout in &layouts {
            let params = base_params.mapped_through(&layout.perm)?;
            let results = exec.batch_search(&layout.graph, &layout.dataset, queries, &params)?;
            let original_ids: Vec<SearchResult> = results
                .iter()
                .map(|r| SearchResult {
                    ids: r.ids.iter().map(|&i| layout.perm.apply_inverse(i)).collect(),
                    ..r.clone()
                })
                .collect();
            let recall = recall_at_k(&original_ids, gt, cfg.k)?;
            let (hops, evals) = mean_stats(&results);
            warm.push(Warm {
                params,
                recall,
                distances: results.into_iter().map(|r| r.distances).collect(),
                hops,
                evals,
            });
        }

        let mut elapsed = vec![Vec::with_capacity(cfg.trials); layouts.len()];
        for _ in 0..cfg.trials {
            for (i, layout) in layouts.iter().enumerate() {
                elapsed[i].push(timed_batch(exec, &layout.graph, &layout.dataset, queries, &warm[i].params)?);
            }
        }

        let base_stats = summarize(nq, &elapsed[0], warm[0].recall, &[], resolution);
        for (i, layout) in layouts.iter().enumerate() {
            let m = summarize(nq, &elapsed[i], warm[i].recall, &[], resolution);
            let matches = warm[i].distances == warm[0].distances;
            if cfg.strict_equivalence && !matches {
                return Err(Error::Bench(format!(
                    "layout `{}` at L = {l} returned different result distances than the baseline",
                    layout.label
                )));
            }
            let speedup = m.qps / base_stats.qps;
            out.records.push(BenchRecord {
                index: cfg.index_label.clone(),
                dataset: cfg.dataset_label.clone(),
                reorder: layout.label.clone(),
                l,
                k: cfg.k,
                recall: m.recall,
                qps: m.qps,
                qps_std: m.qps_std,
                speedup,
                trials: cfg.trials,
                mean_latency_us: m.mean_latency_us,
                mean_hops: warm[i].hops,
                mean_distance_evals: warm[i].evals,
                matches_baseline: matches,
                timer_warning: m.timer_warning,
                timings_s: m.timings.clone(),
            });
            if i > 0 {
                let cv = |q: &QpsMeasurement| if q.qps > 0.0 { q.qps_std / q.qps } else { 0.0 };
                out.speedups.push(SpeedupRecord {
                    index: cfg.index_label.clone(),
                    dataset: cfg.dataset_label.clone(),
                    reorder: layout.label.clone(),
                    l,
                    baseline_recall: warm[0].recall,
                    recall: warm[i].recall,
                    speedup,
                    speedup_rel_sigma: (cv(&base_stats).powi(2) + cv(&m).powi(2)).sqrt(),
                });
            }
        }
    }
    Ok(out)
}

/// A rank correlation that may be undefined because one series is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation {
    Value(f64),
    TieDegenerate,
}

impl Correlation {
    pub fn value(&self) -> Option<f64> {
        match self {
            Correlation::Value(v) => Some(*v),
            Correlation::TieDegenerate => None,
        }
    }

    fn of(xs: &[f64], ys: &[f64]) -> Result<Self> {
        match spearman_rank_correlation(xs, ys) {
            Ok(v) => Ok(Correlation::Value(v)),
            Err(Error::Undefined(_)) => Ok(Correlation::TieDegenerate),
            Err(e) => Err(e),
        }
    }
}

const TIE_DEGENERATE: &str = "tie-degenerate";

impl Serialize for Correlation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Correlation::Value(v) => s.serialize_f64(*v),
            Correlation::TieDegenerate => s.serialize_str(TIE_DEGENERATE),
        }
    }
}

impl<'de> Deserialize<'de> for Correlation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Correlation::Value(v)),
            Raw::Text(t) if t == TIE_DEGENERATE => Ok(Correlation::TieDegenerate),
            Raw::Text(t) => t.parse().map(Correlation::Value).map_err(serde::de::Error::custom),
        }
    }
}

/// Max and mean speed-up for one builder at one dimensionality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionPoint {
    pub builder: String,
    pub d: usize,
    pub max_speedup: f64,
    pub mean_speedup: f64,
}

/// One row of the dimensionality-correlation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub builder: String,
    pub max_speedup_rs: Correlation,
    pub mean_speedup_rs: Correlation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSweepConfig {
    pub d_grid: Vec<usize>,
    pub n: usize,
    pub n_queries: usize,
    pub seed: u64,
    pub query_seed: u64,
    #[serde(default)]
    pub distribution: Distribution,
    #[serde(default)]
    pub normalize: bool,
    pub metric: Metric,
    pub builders: Vec<Builder>,
    pub build: BuildParams,
    /// Template for the per-dimension sweeps; its labels are overwritten.
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DimensionSweepResult {
    pub points: Vec<DimensionPoint>,
    pub table: Vec<CorrelationRow>,
    pub records: Vec<BenchRecord>,
    pub speedups: Vec<SpeedupRecord>,
}

/// Builds the correlation table from per-dimension points. Every builder
/// needs at least two dimensionalities.
pub fn correlation_table(points: &[DimensionPoint]) -> Result<Vec<CorrelationRow>> {
    let mut builders: Vec<&str> = Vec::new();
    for p in points {
        if !builders.contains(&p.builder.as_str()) {
            builders.push(&p.builder);
        }
    }
    builders
        .into_iter()
        .map(|b| {
            let rows: Vec<&DimensionPoint> = points.iter().filter(|p| p.builder == b).collect();
            let ds: Vec<f64> = rows.iter().map(|p| p.d as f64).collect();
            let maxes: Vec<f64> = rows.iter().map(|p| p.max_speedup).collect();
            let means: Vec<f64> = rows.iter().map(|p| p.mean_speedup).collect();
            Ok(CorrelationRow {
                builder: b.to_string(),
                max_speedup_rs: Correlation::of(&ds, &maxes)?,
                mean_speedup_rs: Correlation::of(&ds, &means)?,
            })
        })
        .collect()
}

/// For each dimensionality: synthesize data, build every index, sweep all
/// layouts, and reduce speed-ups to max/mean. Then correlate each against `d`.
pub fn dimension_sweep(exec: &Executor, cfg: &DimensionSweepConfig) -> Result<DimensionSweepResult> {
    if cfg.d_grid.len() < 2 {
        return Err(Error::contract("dimension sweep needs at least two dimensionalities"));
    }
    let mut out = DimensionSweepResult::default();
    for &d in &cfg.d_grid {
        let spec = SyntheticSpec {
            n: cfg.n,
            d,
            seed: cfg.seed,
            query_seed: cfg.query_seed,
            n_queries: cfg.n_queries,
            distribution: cfg.distribution,
            normalize: cfg.normalize,
            allow_same_seed: false,
        };
        let (ds, queries) = generate_synthetic(&spec, cfg.metric)?;
        let gt = exact_ground_truth(&ds, &queries, cfg.sweep.k)?;
        for &builder in &cfg.builders {
            let built = construct::build(builder, &ds, &cfg.build)?;
            let mut sweep_cfg = cfg.sweep.clone();
            sweep_cfg.index_label = builder.to_string();
            sweep_cfg.dataset_label = format!("synthetic-d{d}");
            if let Some(e) = built.entry_points {
                sweep_cfg.entry = EntryPoints::Fixed(e);
            }
            let res = sweep(exec, &built.graph, &ds, &queries, &gt, &sweep_cfg)?;
            out.points.push(DimensionPoint {
                builder: builder.to_string(),
                d,
                max_speedup: res.max_speedup().unwrap_or(1.0),
                mean_speedup: res.mean_speedup().unwrap_or(1.0),
            });
            out.records.extend(res.records);
            out.speedups.extend(res.speedups);
        }
    }
    out.table = correlation_table(&out.points)?;
    Ok(out)
}

/// A series of `(x, y)` points sharing one `(index, dataset, layout)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub index: String,
    pub dataset: String,
    pub reorder: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

fn group_series<T>(
    items: &[T],
    key: impl Fn(&T) -> (&str, &str, &str),
    point: impl Fn(&T) -> (f64, f64),
    labels: (&str, &str),
) -> Vec<CurveSeries> {
    let mut out: Vec<CurveSeries> = Vec::new();
    for it in items {
        let (i, d, r) = key(it);
        let pos = out.iter().position(|s| s.index == i && s.dataset == d && s.reorder == r);
        let series = match pos {
            Some(p) => &mut out[p],
            None => {
                out.push(CurveSeries {
                    index: i.into(),
                    dataset: d.into(),
                    reorder: r.into(),
                    x_label: labels.0.into(),
                    y_label: labels.1.into(),
                    points: Vec::new(),
                });
                out.last_mut().unwrap()
            }
        };
        series.points.push(point(it));
    }
    out
}

/// Recall (x) against QPS (y), one series per layout.
pub fn recall_qps_curves(records: &[BenchRecord]) -> Vec<CurveSeries> {
    group_series(
        records,
        |r| (&r.index, &r.dataset, &r.reorder),
        |r| (r.recall, r.qps),
        ("recall", "qps"),
    )
}

/// Baseline recall (x) against speed-up (y), one series per reordering.
pub fn speedup_curves(speedups: &[SpeedupRecord]) -> Vec<CurveSeries> {
    group_series(
        speedups,
        |s| (&s.index, &s.dataset, &s.reorder),
        |s| (s.baseline_recall, s.speedup),
        ("baseline_recall", "speedup"),
    )
}

/// Average clustering coefficient of an index against the speed-ups its
/// reorderings achieved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LccScatterPoint {
    pub index: String,
    pub dataset: String,
    pub reorder: String,
    pub average_lcc: f64,
    pub max_speedup: f64,
    pub mean_speedup: f64,
}

/// One scatter point per reordering of `speedups`.
pub fn lcc_scatter(average_lcc: f64, speedups: &[SpeedupRecord]) -> Vec<LccScatterPoint> {
    let mut out: Vec<LccScatterPoint> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for s in speedups {
        match out
            .iter()
            .position(|p| p.index == s.index && p.dataset == s.dataset && p.reorder == s.reorder)
        {
            Some(i) => {
                out[i].max_speedup = out[i].max_speedup.max(s.speedup);
                out[i].mean_speedup += s.speedup;
                counts[i] += 1;
            }
            None => {
                out.push(LccScatterPoint {
                    index: s.index.clone(),
                    dataset: s.dataset.clone(),
                    reorder: s.reorder.clone(),
                    average_lcc,
                    max_speedup: s.speedup,
                    mean_speedup: s.speedup,
                });
                counts.push(1);
            }
        }
    }
    for (p, c) in out.iter_mut().zip(counts) {
        p.mean_speedup /= c as f64;
    }
    out
}

/// Serializes rows as CSV with a header row.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>, R: Read>(reader: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// CSV rendering of points with a fixed header, for tables whose cells are
/// not plain numbers (e.g. degenerate correlations).
pub fn correlation_table_csv(rows: &[CorrelationRow]) -> String {
    let cell = |c: &Correlation| match c {
        Correlation::Value(v) => v.to_string(),
        Correlation::TieDegenerate => TIE_DEGENERATE.to_string(),
    };
    let mut s = String::from("builder,max_speedup_rs,mean_speedup_rs\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.builder, cell(&r.max_speedup_rs), cell(&r.mean_speedup_rs)));
    }
    s
}

/// Free-form description of the machine, recorded in run manifests.
pub fn host_info() -> String {
    let cpus = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!("{}-{} cpus={}", std::env::consts::OS, std::env::consts::ARCH, cpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_exact_knn;
    use crate::reorder::{ReorderAlgorithm, ReorderSpec};
    use crate::search::SearchStats;

    fn result(ids: &[u32]) -> SearchResult {
        SearchResult {
            ids: ids.to_vec(),
            distances: vec![0.0; ids.len()],
            stats: SearchStats::default(),
        }
    }

    #[test]
    fn recall_arithmetic() {
        let gt = GroundTruth::from_ids(10, (0..20).collect()).unwrap();
        let same = vec![result(&(0..10).collect::<Vec<_>>()), result(&(10..20).collect::<Vec<_>>())];
        assert_eq!(recall_at_k(&same, &gt, 10).unwrap(), 1.0);
        let disjoint = vec![result(&(100..110).collect::<Vec<_>>()), result(&(200..210).collect::<Vec<_>>())];
        assert_eq!(recall_at_k(&disjoint, &gt, 10).unwrap(), 0.0);
        let q1: Vec<u32> = (0..7).chain(50..53).collect();
        let q2: Vec<u32> = (10..19).chain([99]).collect();
        assert_eq!(recall_at_k(&[result(&q1), result(&q2)], &gt, 10).unwrap(), 0.8);
        assert!(recall_at_k(&same[..1], &gt, 10).is_err());
        assert!(recall_at_k(&same, &gt, 11).is_err());
    }

    #[test]
    fn qps_arithmetic() {
        let m = summarize(1000, &[0.5], 1.0, &[], Duration::from_nanos(1));
        assert_eq!(m.qps, 2000.0);
        assert_eq!(m.qps_std, 0.0);
        assert!(!m.timer_warning);
        assert!(summarize(1000, &[0.5], 1.0, &[], Duration::from_millis(10)).timer_warning);
        let (mean, std) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!((mean, std), (2.0, 1.0));
    }

    fn tiny() -> (FixedDegreeGraph, VectorDataset, Vectors, GroundTruth) {
        let (ds, q) = generate_synthetic(&SyntheticSpec::new(300, 8, 1, 2, 40), Metric::L2).unwrap();
        let g = build_exact_knn(&ds, 8).unwrap();
        let gt = exact_ground_truth(&ds, &q, 10).unwrap();
        (g, ds, q, gt)
    }

    #[test]
    fn measure_qps_shape() {
        let (g, ds, q, gt) = tiny();
        let exec = Executor::new(Some(2)).unwrap();
        let m = measure_qps(&exec, &g, &ds, &q, &gt, &SearchParams::new(40, 10), 5).unwrap();
        assert_eq!(m.timings.0.len(), 5);
        assert!(m.qps > 0.0 && (0.0..=1.0).contains(&m.recall));
        assert!(measure_qps(&exec, &g, &ds, &q, &gt, &SearchParams::new(40, 10), 0).is_err());
    }

    #[test]
    fn sweep_bookkeeping() {
        let (g, ds, q, gt) = tiny();
        let exec = Executor::new(Some(2)).unwrap();
        let specs: Vec<ReorderSpec> = ReorderAlgorithm::STUDIED.into_iter().map(ReorderSpec::new).collect();
        let mut cfg = SweepConfig::new("exact", "tiny", specs);
        cfg.l_grid = vec![10, 20, 40];
        cfg.trials = 2;
        let res = sweep(&exec, &g, &ds, &q, &gt, &cfg).unwrap();
        assert_eq!(res.records.len(), 3 * 7);
        assert_eq!(res.speedups.len(), 3 * 6);
        for l in [10, 20, 40] {
            let at_l: Vec<&BenchRecord> = res.records.iter().filter(|r| r.l == l).collect();
            assert!(at_l.iter().all(|r| r.recall == at_l[0].recall && r.matches_baseline));
            assert_eq!(at_l[0].reorder, BASELINE_LABEL);
            assert_eq!(at_l[0].speedup, 1.0);
        }
        let curves = recall_qps_curves(&res.records);
        assert_eq!(curves.len(), 7);
        assert!(curves.iter().all(|c| c.points.len() == 3));
        assert_eq!(speedup_curves(&res.speedups).len(), 6);
        let scatter = lcc_scatter(0.25, &res.speedups);
        assert_eq!(scatter.len(), 6);
        assert!(scatter.iter().all(|p| p.max_speedup >= p.mean_speedup - 1e-12));
    }

    #[test]
    fn records_round_trip_csv_and_json() {
        let (g, ds, q, gt) = tiny();
        let exec = Executor::new(Some(1)).unwrap();
        let mut cfg = SweepConfig::new("exact", "tiny", vec![ReorderSpec::new(ReorderAlgorithm::Rcm)]);
        cfg.l_grid = vec![10, 30];
        cfg.trials = 3;
        let res = sweep(&exec, &g, &ds, &q, &gt, &cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&res.records, &mut buf).unwrap();
        let back: Vec<BenchRecord> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, res.records);
        let header = String::from_utf8(buf).unwrap().lines().next().unwrap().to_string();
        assert!(header.starts_with("index,dataset,reorder,L,k,recall,qps,qps_std,speedup,trials,"));
        let json = serde_json::to_string(&res).unwrap();
        assert_eq!(serde_json::from_str::<SweepResult>(&json).unwrap(), res);
        let mut sbuf = Vec::new();
        write_csv(&res.speedups, &mut sbuf).unwrap();
        assert_eq!(read_csv::<SpeedupRecord, _>(sbuf.as_slice()).unwrap(), res.speedups);
    }

    #[test]
    fn constant_speedups_are_tie_degenerate() {
        let points: Vec<DimensionPoint> = [8, 16, 32]
            .into_iter()
            .map(|d| DimensionPoint {
                builder: "nn-descent".into(),
                d,
                max_speedup: 1.1,
                mean_speedup: d as f64,
            })
            .collect();
        let table = correlation_table(&points).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].max_speedup_rs, Correlation::TieDegenerate);
        assert_eq!(table[0].mean_speedup_rs, Correlation::Value(1.0));
        let json = serde_json::to_string(&table).unwrap();
        assert!(json.contains("\"tie-degenerate\""));
        assert_eq!(serde_json::from_str::<Vec<CorrelationRow>>(&json).unwrap(), table);
        assert_eq!(
            correlation_table_csv(&table),
            "builder,max_speedup_rs,mean_speedup_rs\nnn-descent,tie-degenerate,1\n"
        );
    }

    #[test]
    fn dimension_sweep_table_shape() {
        let exec = Executor::new(Some(2)).unwrap();
        let mut sweep_cfg = SweepConfig::new("", "", vec![ReorderSpec::new(ReorderAlgorithm::Rcm)]);
        sweep_cfg.l_grid = vec![20, 40];
        sweep_cfg.trials = 1;
        let cfg = DimensionSweepConfig {
            d_grid: vec![8, 16, 32],
            n: 300,
            n_queries: 20,
            seed: 1,
            query_seed: 2,
            distribution: Distribution::Uniform,
            normalize: false,
            metric: Metric::L2,
            builders: vec![Builder::NnDescent, Builder::Vamana],
            build: BuildParams::default().with_k_max(8),
            sweep: sweep_cfg,
        };
        let res = dimension_sweep(&exec, &cfg).unwrap();
        assert_eq!(res.points.len(), 6);
        assert_eq!(res.table.len(), 2);
        assert_eq!(res.table[0].builder, "nn-descent");
        assert_eq!(res.records.len(), 3 * 2 * 2 * 2);
    }
}
