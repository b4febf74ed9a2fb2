//! Benchmark driver: builds each variant on the same data, replays the same
//! trace against it, and reports cumulative search/update time, repartition
//! events and amortized container-operation counts.

mod audit;
mod config;
mod readonly;
mod report;
mod sweep;

use std::path::Path;
use std::time::Instant;

pub use audit::{
    audit, estimate_delta, event_bound, AuditReport, AxisAudit, VariantAudit, CONSTANT_SLACK,
    EVENT_SLACK,
};
pub use config::{BenchConfig, SweepGrid, VariantName, SEED_ENV};
pub use readonly::{readonly, write_readonly, ReadOnlyReport, ReadOnlyVariant};
pub use report::{
    curves, AmortizedStats, Assumption2, CurvePoint, EventSummary, HalfStats, KindSummary,
    RunReport, VariantReport,
};
pub use sweep::{sweep, write_sweep, SweepCell, SweepReport};

use crate::error::{Error, Result};
use crate::point::{Point, QueryBox};
use crate::repartition::RepartitionConfig;
use crate::tuner::{cost_model_refine, heuristic_spec, PartitionSpec};
use crate::variants::{IndexVariant, VariantKind};
use crate::workload::{
    calibrate_max_side, gen_initial, gen_trace, ingest_csv, read_trace, replay, CsvIngest, LiveSet,
    ReplayLog, TraceOp, WorkloadSpec,
};

const ERASE_STREAM: u64 = 0x6572_6173_6500_0002;
const REFINE_SAMPLE: usize = 20_000;

/// Data, trace and layout shared by every variant of a run.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub workload: WorkloadSpec,
    pub seed: u64,
    pub initial: Vec<Point>,
    pub trace: Vec<TraceOp>,
    pub partition: PartitionSpec,
    pub ingest: Option<CsvIngest>,
}

fn initial_points(
    config: &BenchConfig,
    workload: &WorkloadSpec,
) -> Result<(Vec<Point>, Option<CsvIngest>)> {
    match &config.initial_csv {
        Some(path) => {
            let mut ingest = ingest_csv(path, workload.dims, config.csv_has_header)?;
            let points = std::mem::take(&mut ingest.points);
            Ok((points, Some(ingest)))
        }
        None => Ok((gen_initial(workload)?, None)),
    }
}

/// Layout for `initial`: the configured one, else the heuristic, refined
/// against searches from `trace` when a budget is set.
pub fn choose_partition(
    config: &BenchConfig,
    initial: &[Point],
    trace: &[TraceOp],
) -> Result<PartitionSpec> {
    let dims = config.workload.dims;
    if let Some(spec) = &config.partition {
        let spec = PartitionSpec::new(spec.sort_dim, spec.counts.clone())?;
        spec.validate(dims)?;
        return Ok(spec);
    }
    if initial.is_empty() {
        return PartitionSpec::uniform(dims, dims - 1, 1);
    }
    let spec = heuristic_spec(initial, dims, config.target_cell_load)?;
    if config.refine_budget <= 1 {
        return Ok(spec);
    }
    let queries: Vec<QueryBox> = trace
        .iter()
        .filter_map(|op| match op {
            TraceOp::Search(q) => Some(q.clone()),
            _ => None,
        })
        .take(config.refine_queries)
        .collect();
    let step = (initial.len() / REFINE_SAMPLE).max(1);
    let sample: Vec<Point> = initial.iter().step_by(step).cloned().collect();
    cost_model_refine(&spec, &sample, &queries, config.refine_budget)
}

pub fn prepare(config: &BenchConfig) -> Result<Prepared> {
    config.validate()?;
    let seed = config.resolved_seed()?;
    let mut workload = WorkloadSpec {
        seed,
        ..config.workload.clone()
    };
    let (initial, ingest) = initial_points(config, &workload)?;
    let trace = match &config.trace_file {
        Some(path) => read_trace(path, workload.dims)?,
        None => {
            workload.max_side = calibrate_max_side(&workload, &initial)?;
            gen_trace(&workload)?
        }
    };
    let partition = choose_partition(config, &initial, &trace)?;
    Ok(Prepared {
        workload,
        seed,
        initial,
        trace,
        partition,
        ingest,
    })
}

/// One variant's replay with its raw log.
#[derive(Clone, Debug)]
pub struct VariantRun {
    pub report: VariantReport,
    pub log: ReplayLog,
    pub index: IndexVariant,
}

pub fn run_variant(
    kind: VariantKind,
    prepared: &Prepared,
    repartition: RepartitionConfig,
    warmup_searches: usize,
) -> Result<VariantRun> {
    let dims = prepared.workload.dims;
    let t = Instant::now();
    let mut index = IndexVariant::build(
        kind,
        dims,
        prepared.initial.iter().cloned(),
        &prepared.partition,
        repartition,
    )?;
    let build_seconds = t.elapsed().as_secs_f64();
    let initial_assumption2 = Assumption2::new(&index.grid().layout().slab_counts(), index.len());
    for op in prepared
        .trace
        .iter()
        .filter(|op| !op.is_update())
        .take(warmup_searches)
    {
        if let TraceOp::Search(q) = op {
            index.search_with(q, |_| {})?;
        }
    }
    let mut live = LiveSet::from_points(prepared.initial.iter().cloned());
    let log = replay(
        &prepared.trace,
        &mut index,
        &mut live,
        prepared.seed ^ ERASE_STREAM,
    )?;
    let (search_curve, update_curve) = curves(&log.records, prepared.workload.block);
    let digests = log.search_digests();
    let stats = index.stats();
    let report = VariantReport {
        variant: kind,
        name: kind.name(),
        build_seconds,
        search_seconds: search_curve.last().map_or(0.0, |c| c.cumulative_seconds),
        update_seconds: update_curve.last().map_or(0.0, |c| c.cumulative_seconds),
        repeat_search_seconds: Vec::new(),
        repeat_update_seconds: Vec::new(),
        search_curve,
        update_curve,
        searches: log.searches(),
        updates: log.updates(),
        skipped_erases: log.skipped_erases,
        results: digests.iter().map(|d| d.0 as u64).sum(),
        result_checksum: digests.iter().fold(0u64, |h, &(n, c)| {
            h.rotate_left(5) ^ c.wrapping_add(n as u64)
        }),
        initial_assumption2,
        final_assumption2: Assumption2::new(&stats.slab_counts, stats.len),
        events: report::EventSummary::from_events(index.events(), dims, index.degenerate_skips()),
        amortized: AmortizedStats::from_log(&log),
        rebuilds: index.rebuilds(),
        final_stats: stats,
    };
    Ok(VariantRun { report, log, index })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Keeps the repeat with the median search time, reporting median totals.
fn median_run(mut runs: Vec<VariantRun>) -> VariantRun {
    let search: Vec<f64> = runs.iter().map(|r| r.report.search_seconds).collect();
    let update: Vec<f64> = runs.iter().map(|r| r.report.update_seconds).collect();
    let (s, u) = (median(&search), median(&update));
    let keep = search.iter().position(|&x| x == s).unwrap_or(0);
    let mut run = runs.swap_remove(keep);
    run.report.search_seconds = s;
    run.report.update_seconds = u;
    run.report.repeat_search_seconds = search;
    run.report.repeat_update_seconds = update;
    run
}

/// Index of the first search where two variants' results differ.
fn first_mismatch(runs: &[VariantRun]) -> Option<(usize, String, String)> {
    let base = runs.first()?.log.search_digests();
    for run in &runs[1..] {
        let other = run.log.search_digests();
        if let Some(i) = (0..base.len().max(other.len())).find(|&i| base.get(i) != other.get(i)) {
            return Some((i, runs[0].report.name.clone(), run.report.name.clone()));
        }
    }
    None
}

/// Runs every configured variant on the same prepared data.
pub fn run_prepared(
    config: &BenchConfig,
    prepared: &Prepared,
) -> Result<(RunReport, Vec<VariantRun>)> {
    let kinds = config.variant_kinds();
    let mut repeats: Vec<Vec<VariantRun>> = kinds.iter().map(|_| Vec::new()).collect();
    for _ in 0..config.repeats.max(1) {
        for (kind, runs) in kinds.iter().zip(&mut repeats) {
            runs.push(run_variant(
                *kind,
                prepared,
                config.repartition,
                config.warmup_searches,
            )?);
        }
    }
    let runs: Vec<VariantRun> = repeats.into_iter().map(median_run).collect();
    let report = RunReport {
        workload: prepared.workload.clone(),
        seed: prepared.seed,
        queries: prepared.trace.len(),
        initial_points: prepared.initial.len(),
        partition: prepared.partition.clone(),
        repartition: config.repartition,
        checksums_match: first_mismatch(&runs).is_none(),
        variants: runs.iter().map(|r| r.report.clone()).collect(),
    };
    Ok((report, runs))
}

pub fn run(config: &BenchConfig) -> Result<RunReport> {
    let prepared = prepare(config)?;
    Ok(run_prepared(config, &prepared)?.0)
}

fn write_curve(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
    w.write_record(["query", "cumulative_seconds"])
        .map_err(|e| Error::Io(e.into()))?;
    for c in curve {
        w.write_record([c.query.to_string(), c.cumulative_seconds.to_string()])
            .map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.into()))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes `report.json` and per-variant curve CSVs into `out`.
pub fn write_run(report: &RunReport, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    for v in &report.variants {
        write_curve(&out.join(format!("{}_search.csv", v.name)), &v.search_curve)?;
        write_curve(&out.join(format!("{}_update.csv", v.name)), &v.update_curve)?;
    }
    write_json(&out.join("report.json"), report)
}

/// Full benchmark with outputs; fails with the gate error after writing
/// them when variants returned different search results.
pub fn run_to_dir(config: &BenchConfig, out: &Path) -> Result<RunReport> {
    let prepared = prepare(config)?;
    let (report, runs) = run_prepared(config, &prepared)?;
    write_run(&report, out)?;
    if let Some((i, a, b)) = first_mismatch(&runs) {
        return Err(Error::CorrectnessGate(format!(
            "search {i} differs between {a} and {b}"
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_config() -> BenchConfig {
        BenchConfig {
            workload: WorkloadSpec {
                initial: 2000,
                queries: 4000,
                block: 200,
                seed: 5,
                ..WorkloadSpec::default()
            },
            target_cell_load: 32,
            warmup_searches: 5,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn variants_agree_and_report_is_consistent() {
        let report = run(&tiny_config()).unwrap();
        assert!(report.checksums_match);
        assert_eq!(report.variants.len(), 3);
        let checks: Vec<u64> = report.variants.iter().map(|v| v.result_checksum).collect();
        assert!(checks.windows(2).all(|w| w[0] == w[1]));
        for v in &report.variants {
            assert_eq!(v.searches + v.updates, 4000);
            assert_eq!(v.search_curve.len(), 20);
            assert_eq!(v.search_curve.last().unwrap().query, 4000);
            assert!(v.initial_assumption2.satisfied);
        }
        let upd = report.variant(VariantKind::UpdatableFlood).unwrap();
        assert_eq!(upd.events.total(), 0);
        let delta = report.variant(VariantKind::DeltaBuffer { k: 200 }).unwrap();
        assert_eq!(delta.rebuilds, delta.updates / 200);
    }

    #[test]
    fn zero_queries() {
        let mut config = tiny_config();
        config.workload.queries = 0;
        let report = run(&config).unwrap();
        for v in &report.variants {
            assert!(v.search_curve.is_empty());
            assert!(v.initial_assumption2.rhs > 0.0);
        }
    }

    #[test]
    fn empty_initial_set() {
        let mut config = tiny_config();
        config.workload.initial = 0;
        let report = run(&config).unwrap();
        assert!(report.checksums_match);
        assert_eq!(report.partition.counts, vec![1, 1, 1]);
    }

    #[test]
    fn outputs_written() {
        let dir = tempfile::tempdir().unwrap();
        run_to_dir(&tiny_config(), dir.path()).unwrap();
        for f in [
            "report.json",
            "flexflood_search.csv",
            "updatable_flood_update.csv",
            "delta_buffer_200_search.csv",
        ] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.variants.len(), 3);
    }
}
