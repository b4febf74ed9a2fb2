//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line each, and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use flexgrid::bench::{self, BenchConfig, RunReport, SweepGrid, VariantName};
use flexgrid::oracle::NaiveStore;
use flexgrid::tuner::{assumption2_terms, PartitionSpec};
use flexgrid::workload::{gen_initial, gen_trace, LiveSet, TraceOp, WorkloadSpec};
use flexgrid::{IndexVariant, InsertOutcome, Point, RepartitionConfig, Thresholds, VariantKind};

// Tolerances.
const TRACES_PER_DIMS: u64 = 7;
const OPS_PER_TRACE: usize = 10_000;
const EXPECTED_LHS: f64 = 1.4e4;
const EXPECTED_RHS: f64 = 5.0e6;
/// Two significant figures: within half a unit in the second digit.
const TWO_FIGURE_ROUNDING: f64 = 0.05;
const MIN_SEARCH_SPEEDUP: f64 = 2.0;
const MAX_UPDATE_OVERHEAD: f64 = 3.0;
const MIN_DELTA_UPDATE_SLOWDOWN: f64 = 2.0;
const MAX_SWEEP_SEARCH_GAIN_PCT: f64 = 30.0;
const DESK_SEED: u64 = 20_240_601;
/// Timed runs per variant; criteria compare medians.
const DESK_REPEATS: usize = 5;
const READONLY_SEARCHES: usize = 20_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn sorted(mut v: Vec<Point>) -> Vec<Point> {
    v.sort();
    v
}

/// Small-N drifting workload with many slabs so events are frequent.
fn small_workload(dims: usize, seed: u64) -> WorkloadSpec {
    WorkloadSpec {
        dims,
        initial: 400,
        queries: OPS_PER_TRACE,
        block: 100,
        max_side: 6e8,
        seed,
        ..WorkloadSpec::default()
    }
}

struct TraceCheck {
    searches: u64,
    events: u64,
    failures: Vec<String>,
}

/// Replays one trace against all three variants and the naive store,
/// checking results at every search and structure after every event.
fn check_trace(dims: usize, seed: u64) -> TraceCheck {
    let w = small_workload(dims, seed);
    let initial = gen_initial(&w).unwrap();
    let trace = gen_trace(&w).unwrap();
    let spec = PartitionSpec::uniform(dims, dims - 1, 3).unwrap();
    let alpha = Thresholds::default().alpha;
    let mut variants: Vec<IndexVariant> = [
        VariantKind::Flexflood,
        VariantKind::UpdatableFlood,
        VariantKind::DeltaBuffer { k: 100 },
    ]
    .into_iter()
    .map(|k| {
        IndexVariant::build(
            k,
            dims,
            initial.clone(),
            &spec,
            RepartitionConfig::default(),
        )
        .unwrap()
    })
    .collect();
    let mut naive = NaiveStore::from_points(initial.clone());
    let mut live = LiveSet::from_points(initial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xACCE);
    let mut check = TraceCheck {
        searches: 0,
        events: 0,
        failures: Vec::new(),
    };
    for (i, op) in trace.iter().enumerate() {
        let events_before = variants[0].events().len();
        let skips_before = variants[0].degenerate_skips();
        match op {
            TraceOp::Search(q) => {
                check.searches += 1;
                let expect = naive.search_sorted(q);
                for v in &variants {
                    if sorted(v.search(q).unwrap()) != expect {
                        check.failures.push(format!(
                            "D={dims} seed={seed} op {i}: {} search differs",
                            v.kind().name()
                        ));
                    }
                }
                continue;
            }
            TraceOp::Insert(p) => {
                let fresh = naive.insert(p.clone());
                live.insert(p.clone());
                for v in &mut variants {
                    let out = v.insert(p.clone()).unwrap();
                    if (out == InsertOutcome::Inserted) != fresh {
                        check.failures.push(format!(
                            "D={dims} seed={seed} op {i}: insert outcome differs"
                        ));
                    }
                }
            }
            TraceOp::EraseRandomLive => {
                let Some(p) = live.sample(&mut rng).cloned() else {
                    continue;
                };
                live.remove(&p);
                naive.erase(&p);
                for v in &mut variants {
                    v.erase(&p).unwrap();
                }
            }
        }
        let new_events = &variants[0].events()[events_before..];
        if new_events.is_empty() {
            continue;
        }
        check.events += new_events.len() as u64;
        let grid = variants[0].grid();
        if let Err(e) = grid.check_integrity() {
            check
                .failures
                .push(format!("D={dims} seed={seed} op {i}: integrity: {e}"));
        }
        if grid.len() != naive.len()
            || sorted(grid.points().cloned().collect()) != naive.sorted_points()
        {
            check
                .failures
                .push(format!("D={dims} seed={seed} op {i}: stored set changed"));
        }
        if variants[0].degenerate_skips() == skips_before {
            for e in new_events {
                let limit = alpha * e.len as f64 / e.slabs_after as f64;
                if e.loads_after.iter().any(|&l| l as f64 > limit)
                    || e.moved as u64 > e.container_ops
                {
                    check.failures.push(format!(
                        "D={dims} seed={seed} op {i}: post-action bound: {e:?}"
                    ));
                }
            }
        }
    }
    check
}

fn all_traces() -> Vec<TraceCheck> {
    let mut out = Vec::new();
    for dims in [2, 3, 5] {
        for s in 0..TRACES_PER_DIMS {
            out.push(check_trace(dims, 1000 * dims as u64 + s));
        }
    }
    out
}

fn criterion_1(checks: &[TraceCheck]) -> Outcome {
    let searches: u64 = checks.iter().map(|c| c.searches).sum();
    let bad: Vec<&String> = checks
        .iter()
        .flat_map(|c| c.failures.iter())
        .filter(|f| f.contains("search") || f.contains("insert outcome"))
        .collect();
    outcome(
        bad.is_empty() && checks.len() >= 20,
        format!(
            "{} traces, {searches} searches, {} mismatches{}",
            checks.len(),
            bad.len(),
            first(&bad)
        ),
    )
}

fn criterion_2(checks: &[TraceCheck]) -> Outcome {
    let events: u64 = checks.iter().map(|c| c.events).sum();
    let bad: Vec<&String> = checks
        .iter()
        .flat_map(|c| c.failures.iter())
        .filter(|f| !(f.contains("search") || f.contains("insert outcome")))
        .collect();
    outcome(
        bad.is_empty() && events > 0,
        format!(
            "{events} events checked, {} violations{}",
            bad.len(),
            first(&bad)
        ),
    )
}

fn first(v: &[&String]) -> String {
    v.first().map_or(String::new(), |s| format!("; first: {s}"))
}

fn criterion_3() -> Outcome {
    let (lhs, rhs) = assumption2_terms(&[21, 17, 1], 100_000);
    let close = |v: f64, expected: f64| ((v - expected) / expected).abs() <= TWO_FIGURE_ROUNDING;
    outcome(
        close(lhs, EXPECTED_LHS) && close(rhs, EXPECTED_RHS) && lhs <= rhs,
        format!("lhs {lhs:.0}, rhs {rhs:.3e}, satisfied {}", lhs <= rhs),
    )
}

fn desk_config() -> BenchConfig {
    BenchConfig {
        workload: WorkloadSpec {
            seed: DESK_SEED,
            ..WorkloadSpec::desk_scale()
        },
        delta_k: Some(1_000),
        repeats: DESK_REPEATS,
        ..BenchConfig::default()
    }
}

fn seconds(report: &RunReport, kind: VariantKind) -> (f64, f64) {
    let v = report.variant(kind).expect("variant ran");
    (v.search_seconds, v.update_seconds)
}

fn criterion_4(report: &RunReport) -> Outcome {
    let (fs, _) = seconds(report, VariantKind::Flexflood);
    let (us, _) = seconds(report, VariantKind::UpdatableFlood);
    outcome(
        us >= MIN_SEARCH_SPEEDUP * fs && report.checksums_match,
        format!("search: updatable {us:.3}s / flexflood {fs:.3}s = {:.2}x (need >= {MIN_SEARCH_SPEEDUP}x)", us / fs),
    )
}

fn criterion_5(report: &RunReport) -> Outcome {
    let (_, fu) = seconds(report, VariantKind::Flexflood);
    let (_, uu) = seconds(report, VariantKind::UpdatableFlood);
    outcome(
        fu <= MAX_UPDATE_OVERHEAD * uu,
        format!("update: flexflood {fu:.3}s / updatable {uu:.3}s = {:.2}x (need <= {MAX_UPDATE_OVERHEAD}x)", fu / uu),
    )
}

fn criterion_6(report: &RunReport) -> Outcome {
    let audit = bench::audit(report, None).unwrap();
    let v = audit
        .variants
        .iter()
        .find(|v| v.name == "flexflood")
        .unwrap();
    let axes: Vec<String> = v
        .axes
        .iter()
        .map(|a| {
            format!(
                "axis {}: {} <= {:.1}*{:.1}",
                a.axis,
                a.events,
                bench::EVENT_SLACK,
                a.bound
            )
        })
        .collect();
    outcome(
        v.pass,
        format!(
            "delta {:.3}; {}; c first half {:.4}, second {:.4} (limit +{:.0}%)",
            v.delta,
            axes.join(", "),
            v.half_constants[0],
            v.half_constants[1],
            bench::CONSTANT_SLACK * 100.0
        ),
    )
}

fn criterion_7(report: &RunReport) -> Outcome {
    let (_, fu) = seconds(report, VariantKind::Flexflood);
    let (_, du) = seconds(report, VariantKind::DeltaBuffer { k: 1_000 });
    outcome(
        du >= MIN_DELTA_UPDATE_SLOWDOWN * fu,
        format!("update: delta_buffer {du:.3}s / flexflood {fu:.3}s = {:.2}x (need >= {MIN_DELTA_UPDATE_SLOWDOWN}x)", du / fu),
    )
}

fn criterion_8() -> Outcome {
    let mut config = desk_config();
    config.variants = vec![VariantName::Flexflood];
    config.sweep = SweepGrid {
        alphas: vec![1.8, 2.0, 2.2],
        betas: vec![0.25, 1.0 / 3.0, 0.4],
        repeats: 1,
    };
    let report = bench::sweep(&config).unwrap();
    let base = report
        .cells
        .iter()
        .find(|c| c.alpha == 2.0 && c.beta == 1.0 / 3.0)
        .and_then(|c| c.search_pct);
    let best = report
        .cells
        .iter()
        .filter_map(|c| c.search_pct)
        .fold(f64::INFINITY, f64::min);
    let complete = report.cells.len() == 9
        && report
            .cells
            .iter()
            .all(|c| c.valid && c.search_seconds.is_some());
    outcome(
        complete && base == Some(0.0) && best >= -MAX_SWEEP_SEARCH_GAIN_PCT,
        format!("9 cells, baseline {:?}%, best search change {best:+.1}% (limit -{MAX_SWEEP_SEARCH_GAIN_PCT}%)", base),
    )
}

fn criterion_9() -> Outcome {
    let mut config = desk_config();
    config.workload.queries = READONLY_SEARCHES;
    config.variants = vec![VariantName::Flexflood, VariantName::UpdatableFlood];
    let report = bench::readonly(&config).unwrap();
    let events: u64 = report.variants.iter().map(|v| v.events).sum();
    let sums: Vec<String> = report
        .variants
        .iter()
        .map(|v| format!("{} {:016x}", v.name, v.result_checksum))
        .collect();
    outcome(
        report.identical_results && events == 0,
        format!(
            "{} searches, {}, events {events}",
            report.searches,
            sums.join(" / ")
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let checks = all_traces();
    results.push((
        1,
        "variants match the naive store on drift traces",
        criterion_1(&checks),
    ));
    results.push((
        2,
        "structural invariants after every event",
        criterion_2(&checks),
    ));
    results.push((
        3,
        "layout size assumption for {21,17,1} at N=1e5",
        criterion_3(),
    ));
    let report = bench::run(&desk_config()).unwrap();
    results.push((4, "search speedup under drift", criterion_4(&report)));
    results.push((5, "update overhead", criterion_5(&report)));
    results.push((
        6,
        "amortized event and container-op audit",
        criterion_6(&report),
    ));
    results.push((7, "delta buffer update slowdown", criterion_7(&report)));
    results.push((8, "threshold sweep around the defaults", criterion_8()));
    results.push((9, "read-only equivalence", criterion_9()));
    let mut failed = 0;
    for (n, name, o) in &results {
        println!(
            "{} [{n}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
