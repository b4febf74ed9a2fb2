//! The grid index: layout, cell table, point location, range search and
//! set-semantics insert/erase.
//!
//! Every non-sort axis is cut into slabs; a cell is one slab per axis and
//! keeps its points ordered by the sort-axis coordinate. Per-slab live counts
//! are maintained on every update and drive the re-partitioning rules in
//! [`crate::repartition`].

mod cell;
mod layout;

use std::sync::atomic::{AtomicU64, Ordering::Relaxed};

use serde::{Deserialize, Serialize};

pub use cell::Cell;
pub(crate) use cell::Entry;
pub use layout::GridLayout;

use crate::error::{Error, Result};
use crate::point::{Point, QueryBox};
use crate::repartition::{Maintenance, RepartitionConfig, RepartitionEvent};
use crate::tuner::{equal_depth_boundaries, PartitionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsertOutcome {
    Inserted,
    AlreadyPresent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EraseOutcome {
    Erased,
    Absent,
}

/// Cumulative ordered-container and search work.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub container_inserts: u64,
    pub container_erases: u64,
    pub range_scans: u64,
    pub cells_visited: u64,
    pub entries_scanned: u64,
    pub entries_filtered: u64,
}

impl OpCounters {
    /// Inserts plus erases, the unit of update work.
    pub fn container_ops(&self) -> u64 {
        self.container_inserts + self.container_erases
    }

    pub(crate) fn merged(&self, other: &OpCounters) -> OpCounters {
        OpCounters {
            container_inserts: self.container_inserts + other.container_inserts,
            container_erases: self.container_erases + other.container_erases,
            range_scans: self.range_scans + other.range_scans,
            cells_visited: self.cells_visited + other.cells_visited,
            entries_scanned: self.entries_scanned + other.entries_scanned,
            entries_filtered: self.entries_filtered + other.entries_filtered,
        }
    }
}

#[derive(Debug, Default)]
struct AtomicCounters {
    container_inserts: AtomicU64,
    container_erases: AtomicU64,
    range_scans: AtomicU64,
    cells_visited: AtomicU64,
    entries_scanned: AtomicU64,
    entries_filtered: AtomicU64,
}

impl AtomicCounters {
    fn snapshot(&self) -> OpCounters {
        OpCounters {
            container_inserts: self.container_inserts.load(Relaxed),
            container_erases: self.container_erases.load(Relaxed),
            range_scans: self.range_scans.load(Relaxed),
            cells_visited: self.cells_visited.load(Relaxed),
            entries_scanned: self.entries_scanned.load(Relaxed),
            entries_filtered: self.entries_filtered.load(Relaxed),
        }
    }
}

impl Clone for AtomicCounters {
    fn clone(&self) -> Self {
        let s = self.snapshot();
        AtomicCounters {
            container_inserts: s.container_inserts.into(),
            container_erases: s.container_erases.into(),
            range_scans: s.range_scans.into(),
            cells_visited: s.cells_visited.into(),
            entries_scanned: s.entries_scanned.into(),
            entries_filtered: s.entries_filtered.into(),
        }
    }
}

/// Work done by one range search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub count: usize,
    pub cells_visited: u64,
    pub entries_scanned: u64,
    pub entries_filtered: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub len: usize,
    pub dims: usize,
    pub sort_dim: usize,
    pub slab_counts: Vec<usize>,
    pub slab_loads: Vec<Vec<usize>>,
    pub cell_count: usize,
    pub counters: OpCounters,
    pub updates: u64,
    pub events: usize,
    pub degenerate_skips: u64,
}

#[derive(Clone, Debug)]
pub struct GridIndex {
    pub(crate) layout: GridLayout,
    pub(crate) cells: Vec<Cell>,
    pub(crate) slab_loads: Vec<Vec<usize>>,
    pub(crate) len: usize,
    counters: AtomicCounters,
    pub(crate) maintenance: Option<Maintenance>,
    pub(crate) events: Vec<RepartitionEvent>,
    pub(crate) degenerate_skips: u64,
    pub(crate) updates: u64,
    scratch: Vec<usize>,
}

impl GridIndex {
    /// Bulk-loads `points` (duplicates collapse) with equal-depth slab
    /// boundaries on every non-sort axis. Axes with fewer distinct values
    /// than requested slabs get fewer slabs.
    pub fn build(
        dims: usize,
        points: impl IntoIterator<Item = Point>,
        spec: &PartitionSpec,
    ) -> Result<Self> {
        spec.validate(dims)?;
        let mut points: Vec<Point> = points.into_iter().collect();
        if let Some(p) = points.iter().find(|p| p.dims() != dims) {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: p.dims(),
            });
        }
        points.sort_unstable();
        points.dedup();

        let boundaries = (0..dims)
            .map(|axis| {
                if axis == spec.sort_dim {
                    return Vec::new();
                }
                let values: Vec<f64> = points.iter().map(|p| p.get(axis)).collect();
                equal_depth_boundaries(&values, spec.counts[axis]).boundaries
            })
            .collect();
        let layout = GridLayout::new(spec.sort_dim, boundaries)?;
        Ok(Self::with_layout(layout, points))
    }

    /// Loads `points` (assumed deduplicated) into a fixed layout.
    pub(crate) fn with_layout(layout: GridLayout, points: Vec<Point>) -> Self {
        let dims = layout.dims();
        let sort_dim = layout.sort_dim();
        let mut slab_loads: Vec<Vec<usize>> =
            (0..dims).map(|a| vec![0; layout.slab_count(a)]).collect();
        let mut buckets: Vec<Vec<Entry>> = vec![Vec::new(); layout.cell_count()];
        let len = points.len();
        let mut slabs = vec![0; dims];
        for p in points {
            for (axis, s) in slabs.iter_mut().enumerate() {
                *s = layout.slab_of(axis, p.get(axis));
                slab_loads[axis][*s] += 1;
            }
            buckets[layout.cell_index(&slabs)].push(Entry::new(p, sort_dim));
        }
        let cells = buckets
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                Cell::from_sorted(b)
            })
            .collect();
        let counters = AtomicCounters::default();
        counters.container_inserts.store(len as u64, Relaxed);
        GridIndex {
            layout,
            cells,
            slab_loads,
            len,
            counters,
            maintenance: None,
            events: Vec::new(),
            degenerate_skips: 0,
            updates: 0,
            scratch: vec![0; dims],
        }
    }

    /// Enables (or with `None` disables) re-partitioning after updates.
    pub fn set_repartition(&mut self, config: Option<RepartitionConfig>) -> Result<()> {
        self.maintenance = match config {
            Some(c) => Some(Maintenance::new(c, &self.layout)?),
            None => None,
        };
        Ok(())
    }

    pub fn with_repartition(mut self, config: RepartitionConfig) -> Result<Self> {
        self.set_repartition(Some(config))?;
        Ok(self)
    }

    pub fn repartition_config(&self) -> Option<&RepartitionConfig> {
        self.maintenance.as_ref().map(|m| &m.config)
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.layout.dims()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Live count of slab `slab` on `axis`.
    #[inline]
    pub fn slab_load(&self, axis: usize, slab: usize) -> usize {
        self.slab_loads[axis][slab]
    }

    pub fn slab_loads(&self, axis: usize) -> &[usize] {
        &self.slab_loads[axis]
    }

    pub fn events(&self) -> &[RepartitionEvent] {
        &self.events
    }

    pub fn take_events(&mut self) -> Vec<RepartitionEvent> {
        std::mem::take(&mut self.events)
    }

    pub fn degenerate_skips(&self) -> u64 {
        self.degenerate_skips
    }

    pub fn counters(&self) -> OpCounters {
        self.counters.snapshot()
    }

    pub(crate) fn add_container_ops(&self, inserts: u64, erases: u64) {
        self.counters.container_inserts.fetch_add(inserts, Relaxed);
        self.counters.container_erases.fetch_add(erases, Relaxed);
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> + '_ {
        self.cells.iter().flat_map(Cell::points)
    }

    fn check_dims(&self, found: usize) -> Result<()> {
        if found != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found,
            });
        }
        Ok(())
    }

    /// Per-axis slab indices of `p`.
    pub fn locate(&self, p: &Point) -> Result<Vec<usize>> {
        self.check_dims(p.dims())?;
        Ok(self.layout.locate(p))
    }

    fn fill_scratch(&mut self, p: &Point) -> usize {
        let mut index = 0;
        for axis in 0..self.layout.dims() {
            let s = self.layout.slab_of(axis, p.get(axis));
            self.scratch[axis] = s;
            index += s * self.layout.stride(axis);
        }
        index
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        self.check_dims(p.dims())?;
        let slabs = self.layout.locate(p);
        let index = self.layout.cell_index(&slabs);
        Ok(self.cells[index].contains(p, self.layout.sort_dim()))
    }

    pub fn insert(&mut self, p: Point) -> Result<InsertOutcome> {
        self.check_dims(p.dims())?;
        self.updates += 1;
        let index = self.fill_scratch(&p);
        self.counters.container_inserts.fetch_add(1, Relaxed);
        if !self.cells[index].insert(p, self.layout.sort_dim()) {
            return Ok(InsertOutcome::AlreadyPresent);
        }
        self.len += 1;
        for axis in 0..self.layout.dims() {
            self.slab_loads[axis][self.scratch[axis]] += 1;
        }
        self.after_update();
        Ok(InsertOutcome::Inserted)
    }

    pub fn erase(&mut self, p: &Point) -> Result<EraseOutcome> {
        self.check_dims(p.dims())?;
        self.updates += 1;
        let index = self.fill_scratch(p);
        self.counters.container_erases.fetch_add(1, Relaxed);
        if !self.cells[index].remove(p, self.layout.sort_dim()) {
            return Ok(EraseOutcome::Absent);
        }
        self.len -= 1;
        for axis in 0..self.layout.dims() {
            self.slab_loads[axis][self.scratch[axis]] -= 1;
        }
        self.after_update();
        Ok(EraseOutcome::Erased)
    }

    fn after_update(&mut self) {
        if self.maintenance.is_some() {
            let touched = std::mem::take(&mut self.scratch);
            self.maintain(&touched);
            self.scratch = touched;
        }
    }

    /// Calls `visit` on every stored point inside the closed box `q`.
    ///
    /// Only the slab range overlapping `q` is enumerated on each axis; within
    /// a cell the sort axis is answered by an ordered range scan, and
    /// per-coordinate checks are applied only on axes where the cell sits in
    /// the first or last slab of that range.
    pub fn search_with<F: FnMut(&Point)>(
        &self,
        q: &QueryBox,
        mut visit: F,
    ) -> Result<SearchSummary> {
        self.check_dims(q.dims())?;
        let layout = &self.layout;
        let dims = layout.dims();
        let sort_dim = layout.sort_dim();
        let lo = q.lo().coords();
        let hi = q.hi().coords();

        let axes: Vec<usize> = (0..dims).filter(|&a| a != sort_dim).collect();
        let first: Vec<usize> = axes.iter().map(|&a| layout.slab_of(a, lo[a])).collect();
        let last: Vec<usize> = axes.iter().map(|&a| layout.slab_of(a, hi[a])).collect();
        let mut current = first.clone();
        let mut index: usize = axes
            .iter()
            .zip(&current)
            .map(|(&a, &s)| s * layout.stride(a))
            .sum();

        let mut summary = SearchSummary::default();
        let mut filter_axes: Vec<usize> = Vec::with_capacity(axes.len());
        let (scan_lo, scan_hi) = (lo[sort_dim], hi[sort_dim]);
        loop {
            filter_axes.clear();
            for (k, &a) in axes.iter().enumerate() {
                if current[k] == first[k] || current[k] == last[k] {
                    filter_axes.push(a);
                }
            }
            summary.cells_visited += 1;
            let cell = &self.cells[index];
            if !cell.is_empty() {
                for entry in cell.scan(scan_lo, scan_hi) {
                    summary.entries_scanned += 1;
                    let p = entry.point();
                    if !filter_axes.is_empty() {
                        summary.entries_filtered += 1;
                        let c = p.coords();
                        if !filter_axes.iter().all(|&a| lo[a] <= c[a] && c[a] <= hi[a]) {
                            continue;
                        }
                    }
                    summary.count += 1;
                    visit(p);
                }
            }

            // odometer over the slab ranges, last axis fastest
            let mut k = axes.len();
            loop {
                if k == 0 {
                    self.record_search(&summary);
                    return Ok(summary);
                }
                k -= 1;
                let stride = layout.stride(axes[k]);
                if current[k] < last[k] {
                    current[k] += 1;
                    index += stride;
                    break;
                }
                index -= (current[k] - first[k]) * stride;
                current[k] = first[k];
            }
        }
    }

    fn record_search(&self, s: &SearchSummary) {
        self.counters
            .range_scans
            .fetch_add(s.cells_visited, Relaxed);
        self.counters
            .cells_visited
            .fetch_add(s.cells_visited, Relaxed);
        self.counters
            .entries_scanned
            .fetch_add(s.entries_scanned, Relaxed);
        self.counters
            .entries_filtered
            .fetch_add(s.entries_filtered, Relaxed);
    }

    /// Materialized search result, in unspecified order.
    pub fn range_search(&self, q: &QueryBox) -> Result<Vec<Point>> {
        let mut out = Vec::new();
        self.search_with(q, |p| out.push(p.clone()))?;
        Ok(out)
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            len: self.len,
            dims: self.dims(),
            sort_dim: self.layout.sort_dim(),
            slab_counts: self.layout.slab_counts(),
            slab_loads: self.slab_loads.clone(),
            cell_count: self.layout.cell_count(),
            counters: self.counters(),
            updates: self.updates,
            events: self.events.len(),
            degenerate_skips: self.degenerate_skips,
        }
    }

    /// Full structural sweep: table size, boundary ordering, every point in
    /// its located cell, and slab/cell counts summing to `len`.
    pub fn check_integrity(&self) -> std::result::Result<(), String> {
        let layout = &self.layout;
        if self.cells.len() != layout.cell_count() {
            return Err(format!(
                "cell table has {} cells, layout expects {}",
                self.cells.len(),
                layout.cell_count()
            ));
        }
        let product: usize = layout.slab_counts().iter().product();
        if product != layout.cell_count() {
            return Err("cell count differs from product of slab counts".into());
        }
        for axis in 0..layout.dims() {
            if layout.boundaries(axis).windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("boundaries on axis {axis} not strictly increasing"));
            }
            if self.slab_loads[axis].len() != layout.slab_count(axis) {
                return Err(format!("slab counter length mismatch on axis {axis}"));
            }
            let total: usize = self.slab_loads[axis].iter().sum();
            if total != self.len {
                return Err(format!(
                    "axis {axis} slab loads sum to {total}, len is {}",
                    self.len
                ));
            }
        }
        if layout.slab_count(layout.sort_dim()) != 1 {
            return Err("sort axis is partitioned".into());
        }
        let mut loads: Vec<Vec<usize>> = (0..layout.dims())
            .map(|a| vec![0; layout.slab_count(a)])
            .collect();
        let mut total = 0;
        for (index, cell) in self.cells.iter().enumerate() {
            let coords = layout.cell_coords(index);
            total += cell.len();
            for p in cell.points() {
                let located = layout.locate(p);
                if located != coords {
                    return Err(format!(
                        "{p:?} stored in cell {coords:?} but locates to {located:?}"
                    ));
                }
                for (axis, &s) in located.iter().enumerate() {
                    loads[axis][s] += 1;
                }
            }
        }
        if total != self.len {
            return Err(format!("cells hold {total} points, len is {}", self.len));
        }
        if loads != self.slab_loads {
            return Err("slab counters disagree with cell contents".into());
        }
        Ok(())
    }
}
