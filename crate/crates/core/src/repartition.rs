//! Slab re-partitioning: split an overfull slab, and merge or equalize an
//! underfull one with its lighter neighbour.
//!
//! With `N` live points and `x_d` slabs on axis `d`, a slab holding more than
//! `alpha * N / x_d` points is split at its median; one holding fewer than
//! `beta * N / x_d` is merged into its lighter neighbour when that neighbour
//! holds fewer than `gamma * N / x_d`, and otherwise shares the neighbour's
//! points through a moved boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, Entry, GridIndex, GridLayout};
use crate::point::Point;
use crate::tuner::split_sorted;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ThresholdsRepr")]
pub struct Thresholds {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::new(2.0, 1.0 / 3.0).expect("default thresholds are valid")
    }
}

impl Thresholds {
    /// Split coefficient `alpha`, merge/equalize coefficient `beta`, and the
    /// merge-vs-equalize switch halfway between them.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Thresholds::with_gamma(alpha, beta, (alpha + beta) / 2.0)
    }

    pub fn with_gamma(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let t = Thresholds { alpha, beta, gamma };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let Thresholds { alpha, beta, gamma } = *self;
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidThresholds(
                "coefficients must be finite".into(),
            ));
        }
        if !(0.0 < beta && beta < 1.0 && 1.0 < alpha) {
            return Err(Error::InvalidThresholds(format!(
                "need 0 < beta < 1 < alpha, got beta={beta}, alpha={alpha}"
            )));
        }
        if !(beta < gamma && gamma < alpha) {
            return Err(Error::InvalidThresholds(format!(
                "need beta < gamma < alpha, got gamma={gamma}"
            )));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdsRepr {
    alpha: f64,
    beta: f64,
    #[serde(default)]
    gamma: Option<f64>,
}

impl TryFrom<ThresholdsRepr> for Thresholds {
    type Error = Error;

    fn try_from(r: ThresholdsRepr) -> Result<Self> {
        match r.gamma {
            Some(g) => Thresholds::with_gamma(r.alpha, r.beta, g),
            None => Thresholds::new(r.alpha, r.beta),
        }
    }
}

/// Which `x_d` the thresholds are measured against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlabReference {
    /// The axis' current slab count.
    #[default]
    Current,
    /// The slab count when re-partitioning was enabled.
    Initial,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RepartitionConfig {
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub reference: SlabReference,
}

impl RepartitionConfig {
    pub fn new(thresholds: Thresholds) -> Self {
        RepartitionConfig {
            thresholds,
            reference: SlabReference::Current,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Split,
    Merge,
    Equalize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepartitionEvent {
    pub kind: EventKind,
    pub axis: usize,
    /// Slab that triggered the action.
    pub slab: usize,
    pub neighbor: Option<usize>,
    /// Points re-homed to a different cell.
    pub moved: usize,
    /// Ordered-container inserts plus erases spent.
    pub container_ops: u64,
    /// Update ordinal at which the event ran.
    pub timestamp: u64,
    /// Live point count when the event ran.
    pub len: usize,
    /// Slab count on `axis` after the event.
    pub slabs_after: usize,
    /// Loads of the slabs the event produced, lowest index first.
    pub loads_after: Vec<usize>,
}

#[derive(Clone, Debug)]
pub(crate) struct Maintenance {
    pub(crate) config: RepartitionConfig,
    initial: Vec<usize>,
    cursors: Vec<usize>,
}

impl Maintenance {
    pub(crate) fn new(config: RepartitionConfig, layout: &GridLayout) -> Result<Self> {
        config.thresholds.validate()?;
        Ok(Maintenance {
            config,
            initial: layout.slab_counts(),
            cursors: vec![0; layout.dims()],
        })
    }
}

fn partition_cell(cell: Cell, axis: usize, boundary: f64) -> (Cell, Cell) {
    let (low, high): (Vec<Entry>, Vec<Entry>) = cell
        .entries
        .into_iter()
        .partition(|e| e.point().get(axis) < boundary);
    (Cell::from_sorted(low), Cell::from_sorted(high))
}

fn absorb(mut into: Cell, from: Cell) -> Cell {
    for e in from.entries {
        into.entries.insert(e);
    }
    into
}

/// Moves the entries of `src` matching `pred` into `dst`.
fn move_entries(src: &mut Cell, dst: &mut Cell, pred: impl Fn(&Point) -> bool) -> usize {
    if src.is_empty() {
        return 0;
    }
    let (go, stay): (Vec<Entry>, Vec<Entry>) = std::mem::take(&mut src.entries)
        .into_iter()
        .partition(|e| pred(e.point()));
    src.entries = stay.into_iter().collect();
    let moved = go.len();
    for e in go {
        dst.entries.insert(e);
    }
    moved
}

impl GridIndex {
    /// `(outer, x_d, inner)` such that cell `(o, s, r)` on `axis` lives at
    /// `(o * x_d + s) * inner + r`.
    fn span(&self, axis: usize) -> (usize, usize, usize) {
        let x = self.layout.slab_count(axis);
        let inner = self.layout.stride(axis);
        (self.layout.cell_count() / (x * inner), x, inner)
    }

    fn slab_values(&self, axis: usize, slabs: &[usize]) -> Vec<f64> {
        let (outer, x, inner) = self.span(axis);
        let mut values = Vec::with_capacity(slabs.iter().map(|&s| self.slab_loads[axis][s]).sum());
        for o in 0..outer {
            for &s in slabs {
                for r in 0..inner {
                    let cell = &self.cells[(o * x + s) * inner + r];
                    values.extend(cell.points().map(|p| p.get(axis)));
                }
            }
        }
        values.sort_unstable_by(f64::total_cmp);
        values
    }

    fn require_partitionable(&self, axis: usize) -> Result<()> {
        if axis >= self.dims() || axis == self.layout.sort_dim() {
            return Err(Error::InvalidSpec(format!(
                "axis {axis} cannot be re-partitioned"
            )));
        }
        Ok(())
    }

    fn require_adjacent(&self, axis: usize, slab: usize, neighbor: usize) -> Result<()> {
        self.require_partitionable(axis)?;
        let x = self.layout.slab_count(axis);
        if slab >= x || neighbor >= x || slab.abs_diff(neighbor) != 1 {
            return Err(Error::InvalidSpec(format!(
                "slabs {slab} and {neighbor} are not adjacent on axis {axis} with {x} slabs"
            )));
        }
        Ok(())
    }

    fn record(&mut self, mut event: RepartitionEvent) -> RepartitionEvent {
        event.timestamp = self.updates;
        event.len = self.len;
        event.slabs_after = self.layout.slab_count(event.axis);
        self.add_container_ops(event.moved as u64, event.moved as u64);
        self.events.push(event.clone());
        event
    }

    fn reference_slabs(&self, axis: usize) -> usize {
        match &self.maintenance {
            Some(m) if m.config.reference == SlabReference::Initial => m.initial[axis],
            _ => self.layout.slab_count(axis),
        }
    }

    /// Adjacent slab with the smaller load; ties go to the lower index.
    pub fn choose_neighbor(&self, axis: usize, slab: usize) -> usize {
        let x = self.layout.slab_count(axis);
        debug_assert!(x >= 2);
        if slab == 0 {
            return 1;
        }
        if slab + 1 >= x {
            return x - 2;
        }
        let loads = &self.slab_loads[axis];
        if loads[slab - 1] <= loads[slab + 1] {
            slab - 1
        } else {
            slab + 1
        }
    }

    /// Evaluates the three rules on one slab and performs at most one action.
    /// Axes with a single slab, and the sort axis, are exempt.
    pub fn check_slab(
        &mut self,
        axis: usize,
        slab: usize,
        thresholds: &Thresholds,
    ) -> Option<RepartitionEvent> {
        if axis == self.layout.sort_dim() || self.layout.slab_count(axis) < 2 {
            return None;
        }
        let target = self.len as f64 / self.reference_slabs(axis) as f64;
        let load = self.slab_loads[axis][slab] as f64;
        if load > thresholds.alpha * target {
            return self.split_slab(axis, slab).ok().flatten();
        }
        if load < thresholds.beta * target {
            let neighbor = self.choose_neighbor(axis, slab);
            let neighbor_load = self.slab_loads[axis][neighbor] as f64;
            let done = if neighbor_load < thresholds.gamma * target {
                self.merge_slabs(axis, slab, neighbor)
            } else {
                self.equalize_slabs(axis, slab, neighbor)
            };
            return done.ok();
        }
        None
    }

    /// Inserts a boundary at the median `axis` coordinate of the slab (snapped
    /// to a gap between distinct values) and moves the upper half into
    /// `X / x_d` new cells. Returns `Ok(None)` and counts a degenerate skip
    /// when every point in the slab shares one coordinate.
    pub fn split_slab(&mut self, axis: usize, slab: usize) -> Result<Option<RepartitionEvent>> {
        self.require_partitionable(axis)?;
        if slab >= self.layout.slab_count(axis) {
            return Err(Error::InvalidSpec(format!(
                "slab {slab} out of range on axis {axis}"
            )));
        }
        let values = self.slab_values(axis, &[slab]);
        let total = values.len();
        let Some((lower, boundary)) = split_sorted(&values, total.div_ceil(2)) else {
            self.degenerate_skips += 1;
            return Ok(None);
        };

        let (outer, x, inner) = self.span(axis);
        let mut old = std::mem::take(&mut self.cells).into_iter();
        let mut cells = Vec::with_capacity(outer * (x + 1) * inner);
        let mut highs = Vec::with_capacity(inner);
        for _ in 0..outer {
            for s in 0..x {
                if s == slab {
                    for cell in old.by_ref().take(inner) {
                        let (low, high) = partition_cell(cell, axis, boundary);
                        cells.push(low);
                        highs.push(high);
                    }
                    cells.append(&mut highs);
                } else {
                    cells.extend(old.by_ref().take(inner));
                }
            }
        }
        self.cells = cells;
        self.layout.insert_boundary(axis, slab, boundary);
        let upper = total - lower;
        let loads = &mut self.slab_loads[axis];
        loads[slab] = lower;
        loads.insert(slab + 1, upper);

        Ok(Some(self.record(RepartitionEvent {
            kind: EventKind::Split,
            axis,
            slab,
            neighbor: None,
            moved: upper,
            container_ops: 2 * upper as u64,
            timestamp: 0,
            len: 0,
            slabs_after: 0,
            loads_after: vec![lower, upper],
        })))
    }

    /// Removes the boundary between two adjacent slabs, moving the lighter
    /// slab's points into the heavier one's cells.
    pub fn merge_slabs(
        &mut self,
        axis: usize,
        slab: usize,
        neighbor: usize,
    ) -> Result<RepartitionEvent> {
        self.require_adjacent(axis, slab, neighbor)?;
        let lo = slab.min(neighbor);
        let (lo_load, hi_load) = (self.slab_loads[axis][lo], self.slab_loads[axis][lo + 1]);
        let keep_low = lo_load >= hi_load;

        let (outer, x, inner) = self.span(axis);
        let mut old = std::mem::take(&mut self.cells).into_iter();
        let mut cells = Vec::with_capacity(outer * (x - 1) * inner);
        for _ in 0..outer {
            let mut s = 0;
            while s < x {
                if s == lo {
                    let lows: Vec<Cell> = old.by_ref().take(inner).collect();
                    let high_cells = old.by_ref().take(inner);
                    for (low, high) in lows.into_iter().zip(high_cells) {
                        cells.push(if keep_low {
                            absorb(low, high)
                        } else {
                            absorb(high, low)
                        });
                    }
                    s += 2;
                } else {
                    cells.extend(old.by_ref().take(inner));
                    s += 1;
                }
            }
        }
        self.cells = cells;
        self.layout.remove_boundary(axis, lo);
        let loads = &mut self.slab_loads[axis];
        loads[lo] = lo_load + hi_load;
        loads.remove(lo + 1);
        if let Some(m) = self.maintenance.as_mut() {
            m.cursors[axis] = m.cursors[axis].min(x - 2);
        }

        let moved = lo_load.min(hi_load);
        Ok(self.record(RepartitionEvent {
            kind: EventKind::Merge,
            axis,
            slab,
            neighbor: Some(neighbor),
            moved,
            container_ops: 2 * moved as u64,
            timestamp: 0,
            len: 0,
            slabs_after: 0,
            loads_after: vec![lo_load + hi_load],
        }))
    }

    /// Moves the shared boundary of two adjacent slabs to the median of their
    /// union so both end up with (nearly) equal loads; an odd extra point
    /// stays on the lower slab. Falls back to a merge when the union has
    /// fewer than two distinct coordinates.
    pub fn equalize_slabs(
        &mut self,
        axis: usize,
        slab: usize,
        neighbor: usize,
    ) -> Result<RepartitionEvent> {
        self.require_adjacent(axis, slab, neighbor)?;
        let lo = slab.min(neighbor);
        let values = self.slab_values(axis, &[lo, lo + 1]);
        let total = values.len();
        let Some((lower, boundary)) = split_sorted(&values, total.div_ceil(2)) else {
            return self.merge_slabs(axis, slab, neighbor);
        };
        let current = self.layout.boundaries(axis)[lo];

        let (outer, x, inner) = self.span(axis);
        let mut moved = 0;
        for o in 0..outer {
            for r in 0..inner {
                let a = (o * x + lo) * inner + r;
                let b = a + inner;
                let (head, tail) = self.cells.split_at_mut(b);
                let (low, high) = (&mut head[a], &mut tail[0]);
                if boundary < current {
                    moved += move_entries(low, high, |p| p.get(axis) >= boundary);
                } else if boundary > current {
                    moved += move_entries(high, low, |p| p.get(axis) < boundary);
                }
            }
        }
        self.layout.set_boundary(axis, lo, boundary);
        let loads = &mut self.slab_loads[axis];
        loads[lo] = lower;
        loads[lo + 1] = total - lower;

        Ok(self.record(RepartitionEvent {
            kind: EventKind::Equalize,
            axis,
            slab,
            neighbor: Some(neighbor),
            moved,
            container_ops: 2 * moved as u64,
            timestamp: 0,
            len: 0,
            slabs_after: 0,
            loads_after: vec![lower, total - lower],
        }))
    }

    /// Post-update checks: the touched slab on every non-sort axis, plus one
    /// slab per axis chosen round-robin so that slabs which only shrink
    /// relative to a growing `N` are caught within `x_d` updates.
    pub(crate) fn maintain(&mut self, touched: &[usize]) {
        let Some(thresholds) = self.maintenance.as_ref().map(|m| m.config.thresholds) else {
            return;
        };
        for (axis, &slab) in touched.iter().enumerate() {
            if axis == self.layout.sort_dim() {
                continue;
            }
            self.check_slab(axis, slab, &thresholds);
            let x = self.layout.slab_count(axis);
            if x >= 2 {
                let m = self.maintenance.as_mut().expect("maintenance enabled");
                let next = (m.cursors[axis] + 1) % x;
                m.cursors[axis] = next;
                self.check_slab(axis, next, &thresholds);
            }
        }
    }

    /// Runs the post-update checks for a touched point and returns the events
    /// performed. No-op unless re-partitioning is enabled.
    pub fn maintenance_hook(&mut self, touched: &Point) -> Result<Vec<RepartitionEvent>> {
        let slabs = self.locate(touched)?;
        let start = self.events.len();
        self.maintain(&slabs);
        Ok(self.events[start..].to_vec())
    }
}
