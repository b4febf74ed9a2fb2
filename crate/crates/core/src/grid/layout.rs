use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

/// Per-axis slab boundaries. Slab `i` on an axis is the half-open interval
/// `[b_{i-1}, b_i)`, with unbounded outer slabs, so the slab of a value is the
/// number of boundaries `<=` it. Cells are addressed row-major over slab
/// indices with the last axis varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    sort_dim: usize,
    boundaries: Vec<Vec<f64>>,
    #[serde(skip)]
    strides: Vec<usize>,
    #[serde(skip)]
    cells: usize,
}

impl GridLayout {
    pub fn new(sort_dim: usize, boundaries: Vec<Vec<f64>>) -> Result<Self> {
        let dims = boundaries.len();
        if dims < 2 {
            return Err(Error::TooFewDimensions(dims));
        }
        if sort_dim >= dims {
            return Err(Error::InvalidSpec(format!(
                "sort_dim {sort_dim} out of range for {dims} axes"
            )));
        }
        if !boundaries[sort_dim].is_empty() {
            return Err(Error::InvalidSpec("sort axis cannot be partitioned".into()));
        }
        for (axis, b) in boundaries.iter().enumerate() {
            if let Some(&value) = b.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite { axis, value });
            }
            if b.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidSpec(format!(
                    "boundaries on axis {axis} are not strictly increasing"
                )));
            }
        }
        let mut layout = GridLayout {
            sort_dim,
            boundaries,
            strides: Vec::new(),
            cells: 0,
        };
        layout.recompute();
        Ok(layout)
    }

    fn recompute(&mut self) {
        let dims = self.boundaries.len();
        self.strides = vec![1; dims];
        for axis in (0..dims.saturating_sub(1)).rev() {
            self.strides[axis] = self.strides[axis + 1] * self.slab_count(axis + 1);
        }
        self.cells = self.strides[0] * self.slab_count(0);
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.boundaries.len()
    }

    #[inline]
    pub fn sort_dim(&self) -> usize {
        self.sort_dim
    }

    #[inline]
    pub fn boundaries(&self, axis: usize) -> &[f64] {
        &self.boundaries[axis]
    }

    #[inline]
    pub fn slab_count(&self, axis: usize) -> usize {
        self.boundaries[axis].len() + 1
    }

    pub fn slab_counts(&self) -> Vec<usize> {
        (0..self.dims()).map(|a| self.slab_count(a)).collect()
    }

    /// Total number of cells, `Π x_d`.
    #[inline]
    pub fn cell_count(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    #[inline]
    pub fn slab_of(&self, axis: usize, value: f64) -> usize {
        self.boundaries[axis].partition_point(|b| *b <= value)
    }

    /// Inclusive lower and exclusive upper bound of a slab.
    pub fn slab_bounds(&self, axis: usize, slab: usize) -> (f64, f64) {
        let b = &self.boundaries[axis];
        let lo = if slab == 0 {
            f64::NEG_INFINITY
        } else {
            b[slab - 1]
        };
        let hi = b.get(slab).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// Per-axis slab indices of `p`.
    pub fn locate(&self, p: &Point) -> Vec<usize> {
        (0..self.dims())
            .map(|a| self.slab_of(a, p.get(a)))
            .collect()
    }

    pub fn cell_index(&self, slabs: &[usize]) -> usize {
        slabs.iter().zip(&self.strides).map(|(s, st)| s * st).sum()
    }

    pub fn cell_coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims()];
        for (axis, slot) in out.iter_mut().enumerate() {
            *slot = index / self.strides[axis];
            index %= self.strides[axis];
        }
        out
    }

    pub(crate) fn insert_boundary(&mut self, axis: usize, pos: usize, value: f64) {
        self.boundaries[axis].insert(pos, value);
        self.recompute();
    }

    pub(crate) fn remove_boundary(&mut self, axis: usize, pos: usize) {
        self.boundaries[axis].remove(pos);
        self.recompute();
    }

    pub(crate) fn set_boundary(&mut self, axis: usize, pos: usize, value: f64) {
        self.boundaries[axis][pos] = value;
    }
}
