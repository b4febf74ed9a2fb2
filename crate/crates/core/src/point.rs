//! Points and query boxes.
//!
//! A [`Point`] is identified by the exact bit patterns of its coordinates.
//! Negative zero is folded into positive zero on construction so that the
//! identity, the in-cell ordering (`f64::total_cmp`) and the closed-box
//! predicate (IEEE `<=`) all agree on every finite value.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Point(Box<[f64]>);

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let mut coords: Vec<f64> = coords.into();
        for (axis, c) in coords.iter_mut().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite { axis, value: *c });
            }
            if *c == 0.0 {
                *c = 0.0;
            }
        }
        Ok(Point(coords.into_boxed_slice()))
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn get(&self, axis: usize) -> f64 {
        self.0[axis]
    }

    /// Cheap per-point hash; search checksums add these up so they do not
    /// depend on result order.
    #[inline]
    pub fn fingerprint(&self) -> u64 {
        let h = self
            .0
            .iter()
            .fold(0u64, |h, c| h.rotate_left(23) ^ c.to_bits());
        h.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

// Coordinates are finite and never -0.0, so float equality is bitwise
// equality and total_cmp agrees with it.
impl Eq for Point {}

impl Hash for Point {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for c in self.0.iter() {
            state.write_u64(c.to_bits());
        }
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        lex_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    a.len().cmp(&b.len())
}

/// Closed axis-aligned box `lo[d] <= v[d] <= hi[d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryBox {
    lo: Point,
    hi: Point,
}

impl QueryBox {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.dims() != hi.dims() {
            return Err(Error::DimensionMismatch {
                expected: lo.dims(),
                found: hi.dims(),
            });
        }
        for axis in 0..lo.dims() {
            if lo.get(axis) > hi.get(axis) {
                return Err(Error::InvalidBox { axis });
            }
        }
        Ok(QueryBox { lo, hi })
    }

    pub fn from_coords(lo: &[f64], hi: &[f64]) -> Result<Self> {
        QueryBox::new(Point::new(lo)?, Point::new(hi)?)
    }

    /// Degenerate box containing exactly one location.
    pub fn point(p: &Point) -> Self {
        QueryBox {
            lo: p.clone(),
            hi: p.clone(),
        }
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.lo.dims()
    }

    #[inline]
    pub fn lo(&self) -> &Point {
        &self.lo
    }

    #[inline]
    pub fn hi(&self) -> &Point {
        &self.hi
    }

    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        p.coords()
            .iter()
            .zip(self.lo.coords().iter().zip(self.hi.coords()))
            .all(|(v, (l, h))| l <= v && v <= h)
    }
}
