use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TraceOp;
use crate::error::Result;
use crate::grid::{EraseOutcome, InsertOutcome};
use crate::point::Point;
use crate::variants::IndexVariant;

/// Live point set with O(1) uniform sampling.
#[derive(Clone, Debug, Default)]
pub struct LiveSet {
    items: Vec<Point>,
    pos: HashMap<Point, usize>,
}

impl LiveSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points(points: impl IntoIterator<Item = Point>) -> Self {
        let mut s = Self::new();
        for p in points {
            s.insert(p);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.pos.contains_key(p)
    }

    pub fn insert(&mut self, p: Point) -> bool {
        if self.pos.contains_key(&p) {
            return false;
        }
        self.pos.insert(p.clone(), self.items.len());
        self.items.push(p);
        true
    }

    pub fn remove(&mut self, p: &Point) -> bool {
        let Some(i) = self.pos.remove(p) else {
            return false;
        };
        self.items.swap_remove(i);
        if i < self.items.len() {
            *self.pos.get_mut(&self.items[i]).expect("indexed") = i;
        }
        true
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Option<&Point> {
        if self.items.is_empty() {
            None
        } else {
            Some(&self.items[rng.random_range(0..self.items.len())])
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.items
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Search,
    Insert,
    Erase,
    /// An erase issued while the index was empty.
    SkippedErase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpRecord {
    pub kind: RecordKind,
    pub nanos: u64,
    /// Result count for searches.
    pub count: usize,
    /// Order-insensitive digest of the search result set.
    pub checksum: u64,
    /// Container operations performed by this query, repartitioning included.
    pub container_ops: u64,
    pub len_after: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ReplayLog {
    pub records: Vec<OpRecord>,
    pub initial_len: usize,
    /// Per axis, the sum over updates of the slab count after each update.
    pub slab_count_sums: Vec<f64>,
    pub len_sum: f64,
    pub skipped_erases: u64,
}

impl ReplayLog {
    pub fn updates(&self) -> u64 {
        self.records
            .iter()
            .filter(|r| r.kind != RecordKind::Search)
            .count() as u64
    }

    pub fn searches(&self) -> u64 {
        self.records
            .iter()
            .filter(|r| r.kind == RecordKind::Search)
            .count() as u64
    }

    /// `(count, checksum)` of every search, in trace order.
    pub fn search_digests(&self) -> Vec<(usize, u64)> {
        self.records
            .iter()
            .filter(|r| r.kind == RecordKind::Search)
            .map(|r| (r.count, r.checksum))
            .collect()
    }
}

/// Digest of a result set: count and wrapping sum of point fingerprints.
pub fn result_digest<'a>(points: impl IntoIterator<Item = &'a Point>) -> (usize, u64) {
    points.into_iter().fold((0, 0u64), |(n, h), p| {
        (n + 1, h.wrapping_add(p.fingerprint()))
    })
}

/// Runs `trace` against `index`, timing each query. Random erases draw from
/// `live`, which must mirror the index contents, using a generator seeded
/// with `erase_seed` so every variant sees the same erase sequence.
pub fn replay(
    trace: &[TraceOp],
    index: &mut IndexVariant,
    live: &mut LiveSet,
    erase_seed: u64,
) -> Result<ReplayLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(erase_seed);
    let dims = index.dims();
    let mut log = ReplayLog {
        records: Vec::with_capacity(trace.len()),
        initial_len: index.len(),
        slab_count_sums: vec![0.0; dims],
        ..ReplayLog::default()
    };
    for op in trace {
        let ops_before = index.counters().container_ops();
        let (kind, nanos, count, checksum) = match op {
            TraceOp::Search(q) => {
                let (mut n, mut h) = (0usize, 0u64);
                let t = Instant::now();
                index.search_with(q, |p| {
                    n += 1;
                    h = h.wrapping_add(p.fingerprint());
                })?;
                let nanos = t.elapsed().as_nanos() as u64;
                (RecordKind::Search, nanos, n, h)
            }
            TraceOp::Insert(p) => {
                let t = Instant::now();
                let outcome = index.insert(p.clone())?;
                let nanos = t.elapsed().as_nanos() as u64;
                if outcome == InsertOutcome::Inserted {
                    live.insert(p.clone());
                }
                (RecordKind::Insert, nanos, 0, 0)
            }
            TraceOp::EraseRandomLive => match live.sample(&mut rng).cloned() {
                None => {
                    log.skipped_erases += 1;
                    (RecordKind::SkippedErase, 0, 0, 0)
                }
                Some(p) => {
                    let t = Instant::now();
                    let outcome = index.erase(&p)?;
                    let nanos = t.elapsed().as_nanos() as u64;
                    debug_assert_eq!(outcome, EraseOutcome::Erased);
                    live.remove(&p);
                    (RecordKind::Erase, nanos, 0, 0)
                }
            },
        };
        if kind != RecordKind::Search {
            let layout = index.grid().layout();
            for (axis, sum) in log.slab_count_sums.iter_mut().enumerate() {
                *sum += layout.slab_count(axis) as f64;
            }
            log.len_sum += index.len() as f64;
        }
        log.records.push(OpRecord {
            kind,
            nanos,
            count,
            checksum,
            container_ops: index.counters().container_ops() - ops_before,
            len_after: index.len(),
        });
    }
    Ok(log)
}
