use serde::{Deserialize, Serialize};

use crate::grid::IndexStats;
use crate::repartition::{EventKind, RepartitionConfig, RepartitionEvent};
use crate::tuner::{assumption2_terms, PartitionSpec};
use crate::variants::VariantKind;
use crate::workload::{OpRecord, RecordKind, ReplayLog, WorkloadSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub query: usize,
    pub cumulative_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assumption2 {
    pub counts: Vec<usize>,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl Assumption2 {
    pub fn new(counts: &[usize], n: usize) -> Self {
        let (lhs, rhs) = assumption2_terms(counts, n);
        Assumption2 {
            counts: counts.to_vec(),
            n,
            lhs,
            rhs,
            satisfied: lhs <= rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindSummary {
    pub count: u64,
    pub moved: u64,
    pub container_ops: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSummary {
    pub split: KindSummary,
    pub merge: KindSummary,
    pub equalize: KindSummary,
    pub degenerate_skips: u64,
    pub per_axis: Vec<u64>,
}

impl EventSummary {
    pub fn from_events(events: &[RepartitionEvent], dims: usize, degenerate_skips: u64) -> Self {
        let mut s = EventSummary {
            per_axis: vec![0; dims],
            degenerate_skips,
            ..Self::default()
        };
        for e in events {
            let k = match e.kind {
                EventKind::Split => &mut s.split,
                EventKind::Merge => &mut s.merge,
                EventKind::Equalize => &mut s.equalize,
            };
            k.count += 1;
            k.moved += e.moved as u64;
            k.container_ops += e.container_ops;
            s.per_axis[e.axis] += 1;
        }
        s
    }

    pub fn total(&self) -> u64 {
        self.split.count + self.merge.count + self.equalize.count
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HalfStats {
    pub updates: u64,
    pub container_ops: u64,
    pub mean_len: f64,
    pub ops_per_update: f64,
}

impl HalfStats {
    fn of(records: &[&OpRecord]) -> Self {
        let updates = records.len() as u64;
        let container_ops = records.iter().map(|r| r.container_ops).sum();
        let mean_len =
            records.iter().map(|r| r.len_after as f64).sum::<f64>() / updates.max(1) as f64;
        HalfStats {
            updates,
            container_ops,
            mean_len,
            ops_per_update: container_ops as f64 / updates.max(1) as f64,
        }
    }
}

/// Update cost over the trace, with the update sequence split in two halves.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AmortizedStats {
    pub updates: u64,
    pub initial_len: usize,
    pub final_len: usize,
    pub mean_len: f64,
    pub mean_slab_counts: Vec<f64>,
    pub container_ops: u64,
    pub ops_per_update: f64,
    pub halves: [HalfStats; 2],
}

impl AmortizedStats {
    pub fn from_log(log: &ReplayLog) -> Self {
        let updates: Vec<&OpRecord> = log
            .records
            .iter()
            .filter(|r| r.kind != RecordKind::Search)
            .collect();
        let k = updates.len();
        let all = HalfStats::of(&updates);
        let n = k.max(1) as f64;
        AmortizedStats {
            updates: k as u64,
            initial_len: log.initial_len,
            final_len: log.records.last().map_or(log.initial_len, |r| r.len_after),
            mean_len: if k == 0 {
                log.initial_len as f64
            } else {
                log.len_sum / n
            },
            mean_slab_counts: log.slab_count_sums.iter().map(|s| s / n).collect(),
            container_ops: all.container_ops,
            ops_per_update: all.ops_per_update,
            halves: [
                HalfStats::of(&updates[..k / 2]),
                HalfStats::of(&updates[k / 2..]),
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub variant: VariantKind,
    pub name: String,
    pub build_seconds: f64,
    pub search_curve: Vec<CurvePoint>,
    pub update_curve: Vec<CurvePoint>,
    /// Median over repeats.
    pub search_seconds: f64,
    pub update_seconds: f64,
    /// Per-repeat totals, in run order.
    pub repeat_search_seconds: Vec<f64>,
    pub repeat_update_seconds: Vec<f64>,
    pub searches: u64,
    pub updates: u64,
    pub skipped_erases: u64,
    pub results: u64,
    pub result_checksum: u64,
    pub initial_assumption2: Assumption2,
    pub final_assumption2: Assumption2,
    pub events: EventSummary,
    pub amortized: AmortizedStats,
    pub rebuilds: u64,
    pub final_stats: IndexStats,
}

/// Cumulative search and update time at every block end and at the end of
/// the trace.
pub fn curves(records: &[OpRecord], block: usize) -> (Vec<CurvePoint>, Vec<CurvePoint>) {
    let (mut search, mut update) = (Vec::new(), Vec::new());
    let (mut s_ns, mut u_ns) = (0u64, 0u64);
    for (i, r) in records.iter().enumerate() {
        if r.kind == RecordKind::Search {
            s_ns += r.nanos;
        } else {
            u_ns += r.nanos;
        }
        let query = i + 1;
        if query % block.max(1) == 0 || query == records.len() {
            search.push(CurvePoint {
                query,
                cumulative_seconds: s_ns as f64 * 1e-9,
            });
            update.push(CurvePoint {
                query,
                cumulative_seconds: u_ns as f64 * 1e-9,
            });
        }
    }
    (search, update)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub workload: WorkloadSpec,
    pub seed: u64,
    pub queries: usize,
    pub initial_points: usize,
    pub partition: PartitionSpec,
    pub repartition: RepartitionConfig,
    pub checksums_match: bool,
    pub variants: Vec<VariantReport>,
}

impl RunReport {
    pub fn variant(&self, kind: VariantKind) -> Option<&VariantReport> {
        self.variants.iter().find(|v| v.variant == kind)
    }
}
