//! The three comparison structures sharing the grid: the self-repairing
//! grid, the same grid with re-partitioning disabled, and a delta-buffered
//! grid that queues updates and rebuilds from scratch every `K` updates
//! with its original partition spec.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{EraseOutcome, GridIndex, IndexStats, InsertOutcome, OpCounters, SearchSummary};
use crate::point::{Point, QueryBox};
use crate::repartition::{RepartitionConfig, RepartitionEvent};
use crate::tuner::PartitionSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Flexflood,
    UpdatableFlood,
    DeltaBuffer { k: usize },
}

impl VariantKind {
    pub fn name(&self) -> String {
        match self {
            VariantKind::Flexflood => "flexflood".into(),
            VariantKind::UpdatableFlood => "updatable_flood".into(),
            VariantKind::DeltaBuffer { k } => format!("delta_buffer_{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pending {
    Insert,
    Erase,
}

#[derive(Clone, Debug)]
pub struct DeltaBuffer {
    main: GridIndex,
    spec: PartitionSpec,
    k: usize,
    buffer: Vec<(Pending, Point)>,
    // presence of each buffered point once the buffer is applied, which under
    // set semantics is decided by its last buffered op
    overlay: HashMap<Point, bool>,
    len: usize,
    rebuilds: u64,
    retired: OpCounters,
}

impl DeltaBuffer {
    pub fn new(main: GridIndex, spec: PartitionSpec, k: usize) -> Self {
        let len = main.len();
        DeltaBuffer {
            main,
            spec,
            k: k.max(1),
            buffer: Vec::new(),
            overlay: HashMap::new(),
            len,
            rebuilds: 0,
            retired: OpCounters::default(),
        }
    }

    pub fn period(&self) -> usize {
        self.k
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    pub fn main(&self) -> &GridIndex {
        &self.main
    }

    fn contains(&self, p: &Point) -> Result<bool> {
        match self.overlay.get(p) {
            Some(&present) => Ok(present),
            None => self.main.contains(p),
        }
    }

    fn push(&mut self, op: Pending, p: Point) -> Result<()> {
        self.overlay.insert(p.clone(), op == Pending::Insert);
        self.buffer.push((op, p));
        if self.buffer.len() >= self.k {
            self.rebuild()?;
        }
        Ok(())
    }

    fn rebuild(&mut self) -> Result<()> {
        let overlay = std::mem::take(&mut self.overlay);
        self.buffer.clear();
        let mut points: Vec<Point> = self
            .main
            .points()
            .filter(|p| !overlay.contains_key(*p))
            .cloned()
            .collect();
        points.extend(
            overlay
                .into_iter()
                .filter(|(_, present)| *present)
                .map(|(p, _)| p),
        );
        let dims = self.main.dims();
        self.retired = self.retired.merged(&self.main.counters());
        self.main = GridIndex::build(dims, points, &self.spec)?;
        self.len = self.main.len();
        self.rebuilds += 1;
        Ok(())
    }

    pub fn insert(&mut self, p: Point) -> Result<InsertOutcome> {
        let present = self.contains(&p)?;
        if !present {
            self.len += 1;
        }
        self.push(Pending::Insert, p)?;
        Ok(if present {
            InsertOutcome::AlreadyPresent
        } else {
            InsertOutcome::Inserted
        })
    }

    pub fn erase(&mut self, p: &Point) -> Result<EraseOutcome> {
        let present = self.contains(p)?;
        if present {
            self.len -= 1;
        }
        self.push(Pending::Erase, p.clone())?;
        Ok(if present {
            EraseOutcome::Erased
        } else {
            EraseOutcome::Absent
        })
    }

    /// Main-structure hits, minus points the buffer overrides, plus buffered
    /// inserts inside the box.
    pub fn search_with<F: FnMut(&Point)>(
        &self,
        q: &QueryBox,
        mut visit: F,
    ) -> Result<SearchSummary> {
        if self.overlay.is_empty() {
            return self.main.search_with(q, visit);
        }
        let mut count = 0;
        let mut summary = self.main.search_with(q, |p| {
            if !self.overlay.contains_key(p) {
                count += 1;
                visit(p);
            }
        })?;
        for (p, _) in self
            .overlay
            .iter()
            .filter(|(p, present)| **present && q.contains(p))
        {
            count += 1;
            visit(p);
        }
        summary.count = count;
        Ok(summary)
    }
}

/// One of the comparison structures behind a common update/search surface.
#[derive(Clone, Debug)]
pub enum IndexVariant {
    Flexflood(GridIndex),
    UpdatableFlood(GridIndex),
    DeltaBuffer(DeltaBuffer),
}

impl IndexVariant {
    pub fn build(
        kind: VariantKind,
        dims: usize,
        points: impl IntoIterator<Item = Point>,
        spec: &PartitionSpec,
        repartition: RepartitionConfig,
    ) -> Result<Self> {
        let index = GridIndex::build(dims, points, spec)?;
        Ok(match kind {
            VariantKind::Flexflood => IndexVariant::Flexflood(index.with_repartition(repartition)?),
            VariantKind::UpdatableFlood => IndexVariant::UpdatableFlood(index),
            VariantKind::DeltaBuffer { k } => {
                IndexVariant::DeltaBuffer(DeltaBuffer::new(index, spec.clone(), k))
            }
        })
    }

    pub fn kind(&self) -> VariantKind {
        match self {
            IndexVariant::Flexflood(_) => VariantKind::Flexflood,
            IndexVariant::UpdatableFlood(_) => VariantKind::UpdatableFlood,
            IndexVariant::DeltaBuffer(d) => VariantKind::DeltaBuffer { k: d.k },
        }
    }

    /// The grid currently answering searches.
    pub fn grid(&self) -> &GridIndex {
        match self {
            IndexVariant::Flexflood(g) | IndexVariant::UpdatableFlood(g) => g,
            IndexVariant::DeltaBuffer(d) => &d.main,
        }
    }

    pub fn dims(&self) -> usize {
        self.grid().dims()
    }

    pub fn len(&self) -> usize {
        match self {
            IndexVariant::Flexflood(g) | IndexVariant::UpdatableFlood(g) => g.len(),
            IndexVariant::DeltaBuffer(d) => d.len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&mut self, p: Point) -> Result<InsertOutcome> {
        match self {
            IndexVariant::Flexflood(g) | IndexVariant::UpdatableFlood(g) => g.insert(p),
            IndexVariant::DeltaBuffer(d) => d.insert(p),
        }
    }

    pub fn erase(&mut self, p: &Point) -> Result<EraseOutcome> {
        match self {
            IndexVariant::Flexflood(g) | IndexVariant::UpdatableFlood(g) => g.erase(p),
            IndexVariant::DeltaBuffer(d) => d.erase(p),
        }
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        match self {
            IndexVariant::Flexflood(g) | IndexVariant::UpdatableFlood(g) => g.contains(p),
            IndexVariant::DeltaBuffer(d) => d.contains(p),
        }
    }

    pub fn search_with<F: FnMut(&Point)>(&self, q: &QueryBox, visit: F) -> Result<SearchSummary> {
        match self {
            IndexVariant::Flexflood(g) | IndexVariant::UpdatableFlood(g) => g.search_with(q, visit),
            IndexVariant::DeltaBuffer(d) => d.search_with(q, visit),
        }
    }

    pub fn search(&self, q: &QueryBox) -> Result<Vec<Point>> {
        let mut out = Vec::new();
        self.search_with(q, |p| out.push(p.clone()))?;
        Ok(out)
    }

    pub fn events(&self) -> &[RepartitionEvent] {
        self.grid().events()
    }

    pub fn degenerate_skips(&self) -> u64 {
        self.grid().degenerate_skips()
    }

    /// Container and search work, including work done by structures a
    /// delta buffer has since rebuilt.
    pub fn counters(&self) -> OpCounters {
        match self {
            IndexVariant::DeltaBuffer(d) => d.retired.merged(&d.main.counters()),
            other => other.grid().counters(),
        }
    }

    pub fn stats(&self) -> IndexStats {
        let mut stats = self.grid().stats();
        stats.counters = self.counters();
        stats.len = self.len();
        stats
    }

    pub fn rebuilds(&self) -> u64 {
        match self {
            IndexVariant::DeltaBuffer(d) => d.rebuilds,
            _ => 0,
        }
    }

    /// Every live point, including buffered inserts.
    pub fn live_points(&self) -> Vec<Point> {
        match self {
            IndexVariant::DeltaBuffer(d) => {
                let mut out: Vec<Point> = d
                    .main
                    .points()
                    .filter(|p| !d.overlay.contains_key(*p))
                    .cloned()
                    .collect();
                out.extend(
                    d.overlay
                        .iter()
                        .filter(|(_, v)| **v)
                        .map(|(p, _)| p.clone()),
                );
                out
            }
            other => other.grid().points().cloned().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::NaiveStore;

    fn p(x: f64, y: f64) -> Point {
        Point::new(vec![x, y]).unwrap()
    }

    fn build(kind: VariantKind, n: usize) -> IndexVariant {
        let pts = (0..n).map(|i| p(i as f64, (i * 7 % 11) as f64));
        let spec = PartitionSpec::uniform(2, 1, 4).unwrap();
        IndexVariant::build(kind, 2, pts, &spec, RepartitionConfig::default()).unwrap()
    }

    #[test]
    fn names() {
        assert_eq!(VariantKind::Flexflood.name(), "flexflood");
        assert_eq!(VariantKind::UpdatableFlood.name(), "updatable_flood");
        assert_eq!(
            VariantKind::DeltaBuffer { k: 100 }.name(),
            "delta_buffer_100"
        );
    }

    #[test]
    fn rebuild_every_k_updates() {
        let mut v = build(VariantKind::DeltaBuffer { k: 4 }, 20);
        let IndexVariant::DeltaBuffer(d) = &v else {
            unreachable!()
        };
        assert_eq!(d.period(), 4);
        for i in 0..3 {
            v.insert(p(100.0 + i as f64, 0.0)).unwrap();
        }
        let IndexVariant::DeltaBuffer(d) = &v else {
            unreachable!()
        };
        assert_eq!((d.buffered(), d.rebuilds()), (3, 0));
        assert_eq!(d.main().len(), 20);
        assert_eq!(v.len(), 23);
        v.erase(&p(0.0, 0.0)).unwrap();
        let IndexVariant::DeltaBuffer(d) = &v else {
            unreachable!()
        };
        assert_eq!((d.buffered(), d.rebuilds()), (0, 1));
        assert_eq!(d.main().len(), 22);
        d.main().check_integrity().unwrap();
    }

    #[test]
    fn buffered_ops_visible_to_queries() {
        let mut v = build(VariantKind::DeltaBuffer { k: 100 }, 10);
        let q = QueryBox::from_coords(&[0.0, 0.0], &[50.0, 50.0]).unwrap();
        assert_eq!(v.insert(p(20.0, 1.0)).unwrap(), InsertOutcome::Inserted);
        assert_eq!(
            v.insert(p(20.0, 1.0)).unwrap(),
            InsertOutcome::AlreadyPresent
        );
        assert_eq!(v.erase(&p(3.0, 10.0)).unwrap(), EraseOutcome::Erased);
        assert_eq!(v.erase(&p(3.0, 10.0)).unwrap(), EraseOutcome::Absent);
        // erase then re-insert: the last buffered op wins
        v.erase(&p(4.0, 6.0)).unwrap();
        v.insert(p(4.0, 6.0)).unwrap();
        assert!(v.contains(&p(20.0, 1.0)).unwrap());
        assert!(!v.contains(&p(3.0, 10.0)).unwrap());
        assert!(v.contains(&p(4.0, 6.0)).unwrap());
        let mut got = v.search(&q).unwrap();
        got.sort();
        let mut naive = NaiveStore::from_points((0..10).map(|i| p(i as f64, (i * 7 % 11) as f64)));
        naive.insert(p(20.0, 1.0));
        naive.erase(&p(3.0, 10.0));
        assert_eq!(got, naive.search_sorted(&q));
        assert_eq!(v.len(), 10);
        assert_eq!(v.search_with(&q, |_| {}).unwrap().count, 10);
    }

    #[test]
    fn updatable_never_repartitions() {
        let mut v = build(VariantKind::UpdatableFlood, 100);
        for i in 0..500 {
            v.insert(p(1000.0 + i as f64, 0.5)).unwrap();
        }
        assert!(v.events().is_empty());
        assert_eq!(v.grid().layout().slab_counts(), vec![4, 1]);
        let mut f = build(VariantKind::Flexflood, 100);
        for i in 0..500 {
            f.insert(p(1000.0 + i as f64, 0.5)).unwrap();
        }
        assert!(!f.events().is_empty());
        assert!(f.grid().layout().slab_count(0) > 4);
    }

    #[test]
    fn counters_survive_rebuilds() {
        let mut v = build(VariantKind::DeltaBuffer { k: 5 }, 10);
        for i in 0..10 {
            v.insert(p(50.0 + i as f64, 0.0)).unwrap();
        }
        assert_eq!(v.rebuilds(), 2);
        // 10 initial inserts, then 15 and 20 on the two rebuilds
        assert_eq!(v.counters().container_inserts, 45);
        assert_eq!(v.live_points().len(), 20);
    }
}
