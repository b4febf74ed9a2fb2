use std::borrow::Borrow;
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::ops::Bound;

use crate::point::{lex_cmp, Point};

/// Ordering key view shared by stored entries and lookup probes, so the set
/// can be searched without allocating a `Point`.
pub(crate) trait SortKey {
    fn sort_value(&self) -> f64;
    fn tuple(&self) -> &[f64];
}

fn key_cmp(a: &dyn SortKey, b: &dyn SortKey) -> Ordering {
    a.sort_value()
        .total_cmp(&b.sort_value())
        .then_with(|| lex_cmp(a.tuple(), b.tuple()))
}

impl PartialEq for dyn SortKey + '_ {
    fn eq(&self, other: &Self) -> bool {
        key_cmp(self, other) == Ordering::Equal
    }
}

impl Eq for dyn SortKey + '_ {}

impl PartialOrd for dyn SortKey + '_ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for dyn SortKey + '_ {
    fn cmp(&self, other: &Self) -> Ordering {
        key_cmp(self, other)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Entry {
    key: f64,
    point: Point,
}

impl Entry {
    pub(crate) fn new(point: Point, sort_dim: usize) -> Self {
        Entry {
            key: point.get(sort_dim),
            point,
        }
    }

    #[inline]
    pub(crate) fn point(&self) -> &Point {
        &self.point
    }
}

impl SortKey for Entry {
    fn sort_value(&self) -> f64 {
        self.key
    }
    fn tuple(&self) -> &[f64] {
        self.point.coords()
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.point == other.point
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        key_cmp(self, other)
    }
}

impl<'a> Borrow<dyn SortKey + 'a> for Entry {
    fn borrow(&self) -> &(dyn SortKey + 'a) {
        self
    }
}

pub(crate) struct Probe<'a> {
    key: f64,
    tuple: &'a [f64],
}

impl SortKey for Probe<'_> {
    fn sort_value(&self) -> f64 {
        self.key
    }
    fn tuple(&self) -> &[f64] {
        self.tuple
    }
}

static BELOW: [f64; 1] = [f64::NEG_INFINITY];
static ABOVE: [f64; 1] = [f64::INFINITY];

impl<'a> Probe<'a> {
    pub(crate) fn of(point: &'a Point, sort_dim: usize) -> Self {
        Probe {
            key: point.get(sort_dim),
            tuple: point.coords(),
        }
    }

    /// Sorts before every stored entry whose sort value is `key`.
    pub(crate) fn below(key: f64) -> Probe<'static> {
        Probe { key, tuple: &BELOW }
    }

    /// Sorts after every stored entry whose sort value is `key`.
    pub(crate) fn above(key: f64) -> Probe<'static> {
        Probe { key, tuple: &ABOVE }
    }
}

/// Ordered set of points keyed by sort-axis value, ties broken by the full
/// coordinate tuple.
#[derive(Clone, Debug, Default)]
pub struct Cell {
    pub(crate) entries: BTreeSet<Entry>,
}

impl Cell {
    pub(crate) fn from_sorted(entries: Vec<Entry>) -> Self {
        Cell {
            entries: entries.into_iter().collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> + '_ {
        self.entries.iter().map(Entry::point)
    }

    pub(crate) fn insert(&mut self, point: Point, sort_dim: usize) -> bool {
        self.entries.insert(Entry::new(point, sort_dim))
    }

    pub(crate) fn remove(&mut self, point: &Point, sort_dim: usize) -> bool {
        let probe = Probe::of(point, sort_dim);
        self.entries.remove(&probe as &dyn SortKey)
    }

    pub(crate) fn contains(&self, point: &Point, sort_dim: usize) -> bool {
        let probe = Probe::of(point, sort_dim);
        self.entries.contains(&probe as &dyn SortKey)
    }

    /// Entries whose sort value lies in `[lo, hi]`.
    pub(crate) fn scan(&self, lo: f64, hi: f64) -> impl Iterator<Item = &Entry> + '_ {
        let lo = Probe::below(lo);
        let hi = Probe::above(hi);
        let range: (Bound<&dyn SortKey>, Bound<&dyn SortKey>) =
            (Bound::Excluded(&lo), Bound::Excluded(&hi));
        self.entries.range::<dyn SortKey, _>(range)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn set_semantics_and_scan() {
        let mut cell = Cell::default();
        assert!(cell.insert(p(&[1.0, 5.0]), 1));
        assert!(!cell.insert(p(&[1.0, 5.0]), 1));
        assert!(cell.insert(p(&[0.0, 5.0]), 1));
        assert!(cell.insert(p(&[2.0, 7.0]), 1));
        assert!(cell.insert(p(&[3.0, 4.0]), 1));
        let hits: Vec<_> = cell.scan(5.0, 5.0).map(|e| e.point().clone()).collect();
        assert_eq!(hits, vec![p(&[0.0, 5.0]), p(&[1.0, 5.0])]);
        assert_eq!(cell.scan(4.5, 100.0).count(), 3);
        assert!(cell.contains(&p(&[3.0, 4.0]), 1));
        assert!(cell.remove(&p(&[3.0, 4.0]), 1));
        assert!(!cell.remove(&p(&[3.0, 4.0]), 1));
        assert_eq!(cell.len(), 3);
    }
}
