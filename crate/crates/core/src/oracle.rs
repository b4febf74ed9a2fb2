//! Brute-force reference store: a hash set and a linear scan. No sorting, no
//! pruning.

use std::collections::HashSet;

use crate::point::{Point, QueryBox};

#[derive(Clone, Debug, Default)]
pub struct NaiveStore {
    live: HashSet<Point>,
}

impl NaiveStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points(points: impl IntoIterator<Item = Point>) -> Self {
        NaiveStore {
            live: points.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.live.contains(p)
    }

    /// True when `p` was not already present.
    pub fn insert(&mut self, p: Point) -> bool {
        self.live.insert(p)
    }

    /// True when `p` was present.
    pub fn erase(&mut self, p: &Point) -> bool {
        self.live.remove(p)
    }

    pub fn search(&self, q: &QueryBox) -> Vec<Point> {
        let mut out = Vec::new();
        for p in &self.live {
            let inside =
                (0..p.dims()).all(|d| q.lo().get(d) <= p.get(d) && p.get(d) <= q.hi().get(d));
            if inside {
                out.push(p.clone());
            }
        }
        out
    }

    pub fn search_sorted(&self, q: &QueryBox) -> Vec<Point> {
        let mut out = self.search(q);
        out.sort();
        out
    }

    pub fn sorted_points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = self.live.iter().cloned().collect();
        out.sort();
        out
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> + '_ {
        self.live.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn empty_search() {
        let q = QueryBox::from_coords(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(NaiveStore::new().search(&q).is_empty());
    }

    #[test]
    fn closed_box_includes_boundary() {
        let store = NaiveStore::from_points([p(&[0.0, 0.5]), p(&[1.0, 1.0]), p(&[1.0, 1.5])]);
        let q = QueryBox::from_coords(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(
            store.search_sorted(&q),
            vec![p(&[0.0, 0.5]), p(&[1.0, 1.0])]
        );
    }

    #[test]
    fn order_insensitive() {
        let pts: Vec<Point> = (0..50)
            .map(|i| p(&[f64::from(i % 7), f64::from(i % 5)]))
            .collect();
        let a = NaiveStore::from_points(pts.iter().cloned());
        let b = NaiveStore::from_points(pts.iter().rev().cloned());
        let q = QueryBox::from_coords(&[1.0, 1.0], &[4.0, 3.0]).unwrap();
        assert_eq!(a.search_sorted(&q), b.search_sorted(&q));
        // second, independent scan ordering over a plain vector
        let mut direct: Vec<Point> = pts.iter().filter(|p| q.contains(p)).cloned().collect();
        direct.sort();
        direct.dedup();
        assert_eq!(a.search_sorted(&q), direct);
    }
}
