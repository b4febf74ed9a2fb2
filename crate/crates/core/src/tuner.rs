//! Initial partition selection and equal-depth boundary placement.
//!
//! The layout is chosen either by a deterministic heuristic (sort on the axis
//! with the most distinct values, uniform slab counts elsewhere) or refined
//! by coordinate descent over simulated query cost on a sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridIndex;
use crate::point::{Point, QueryBox};

pub const DEFAULT_TARGET_CELL_LOAD: usize = 256;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecSource {
    #[default]
    User,
    Heuristic,
    CostModel,
}

/// Sort dimension plus the number of slabs on every axis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub sort_dim: usize,
    pub counts: Vec<usize>,
    #[serde(default)]
    pub source: SpecSource,
}

impl PartitionSpec {
    /// Builds a user spec; the sort axis count is forced to 1.
    pub fn new(sort_dim: usize, mut counts: Vec<usize>) -> Result<Self> {
        if sort_dim < counts.len() {
            counts[sort_dim] = 1;
        }
        let spec = PartitionSpec {
            sort_dim,
            counts,
            source: SpecSource::User,
        };
        spec.validate(spec.counts.len())?;
        Ok(spec)
    }

    /// Uniform slab count on every axis but `sort_dim`.
    pub fn uniform(dims: usize, sort_dim: usize, count: usize) -> Result<Self> {
        PartitionSpec::new(sort_dim, vec![count; dims])
    }

    pub fn dims(&self) -> usize {
        self.counts.len()
    }

    pub fn validate(&self, dims: usize) -> Result<()> {
        if dims < 2 {
            return Err(Error::TooFewDimensions(dims));
        }
        if self.counts.len() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: self.counts.len(),
            });
        }
        if self.sort_dim >= dims {
            return Err(Error::InvalidSpec(format!(
                "sort_dim {} out of range for {} axes",
                self.sort_dim, dims
            )));
        }
        if let Some(axis) = self.counts.iter().position(|&x| x < 1) {
            return Err(Error::InvalidSpec(format!("axis {axis} has zero slabs")));
        }
        if self.counts[self.sort_dim] != 1 {
            return Err(Error::InvalidSpec(format!(
                "sort axis {} must have exactly one slab",
                self.sort_dim
            )));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.counts.iter().product()
    }
}

/// Result of [`equal_depth_boundaries`].
#[derive(Clone, Debug, PartialEq)]
pub struct EqualDepth {
    pub boundaries: Vec<f64>,
    /// Fewer distinct gaps than requested boundaries.
    pub reduced: bool,
}

impl EqualDepth {
    pub fn parts(&self) -> usize {
        self.boundaries.len() + 1
    }
}

/// A value strictly between `a < b` when one is representable, else `b`.
/// Either choice keeps `a` below and `b` at-or-above the boundary.
pub(crate) fn gap_value(a: f64, b: f64) -> f64 {
    let mid = a / 2.0 + b / 2.0;
    if a < mid && mid < b {
        mid
    } else {
        b
    }
}

/// Positions `g` in `1..len` where `sorted[g - 1] < sorted[g]`.
fn distinct_gaps(sorted: &[f64]) -> Vec<usize> {
    (1..sorted.len())
        .filter(|&g| sorted[g - 1] < sorted[g])
        .collect()
}

/// Index into `gaps` (restricted to `lo..=hi`) of the gap nearest to
/// `target`; distance ties go to the upper gap.
fn nearest_gap(gaps: &[usize], target: usize, lo: usize, hi: usize) -> usize {
    let idx = gaps.partition_point(|&g| g < target).clamp(lo, hi);
    if idx > lo {
        let below = gaps[idx - 1];
        let above = gaps[idx];
        if target.abs_diff(below) < above.abs_diff(target) {
            return idx - 1;
        }
    }
    idx
}

/// Splits sorted values so the lower part holds as close to `target`
/// elements as distinct values allow. Returns `(lower_count, boundary)`, or
/// `None` when all values are identical.
pub(crate) fn split_sorted(sorted: &[f64], target: usize) -> Option<(usize, f64)> {
    let gaps = distinct_gaps(sorted);
    if gaps.is_empty() {
        return None;
    }
    let g = gaps[nearest_gap(&gaps, target, 0, gaps.len() - 1)];
    Some((g, gap_value(sorted[g - 1], sorted[g])))
}

/// Equal-depth (quantile) boundaries splitting `values` into `parts` slabs
/// under the half-open convention `[b_i, b_{i+1})`.
pub fn equal_depth_boundaries(values: &[f64], parts: usize) -> EqualDepth {
    let parts = parts.max(1);
    if parts == 1 {
        return EqualDepth {
            boundaries: Vec::new(),
            reduced: false,
        };
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let gaps = distinct_gaps(&sorted);
    let wanted = parts - 1;
    if gaps.len() <= wanted {
        return EqualDepth {
            boundaries: gaps
                .iter()
                .map(|&g| gap_value(sorted[g - 1], sorted[g]))
                .collect(),
            reduced: gaps.len() < wanted,
        };
    }
    let mut boundaries = Vec::with_capacity(wanted);
    let mut next_free = 0;
    for j in 1..parts {
        let target = j * n / parts;
        let remaining = wanted - j;
        let hi = gaps.len() - 1 - remaining;
        let idx = nearest_gap(&gaps, target, next_free, hi);
        let g = gaps[idx];
        boundaries.push(gap_value(sorted[g - 1], sorted[g]));
        next_free = idx + 1;
    }
    EqualDepth {
        boundaries,
        reduced: false,
    }
}

fn distinct_count(sample: &[Point], axis: usize) -> usize {
    let mut values: Vec<f64> = sample.iter().map(|p| p.get(axis)).collect();
    values.sort_unstable_by(f64::total_cmp);
    values.dedup();
    values.len()
}

/// Deterministic stand-in for a learned layout: the axis with the most
/// distinct values is the sort axis (ties go to the highest index) and every
/// other axis gets `round((N / target_cell_load)^(1 / (D - 1)))` slabs.
pub fn heuristic_spec(
    sample: &[Point],
    dims: usize,
    target_cell_load: usize,
) -> Result<PartitionSpec> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if dims < 2 {
        return Err(Error::TooFewDimensions(dims));
    }
    if target_cell_load < 1 {
        return Err(Error::InvalidSpec(
            "target_cell_load must be at least 1".into(),
        ));
    }
    if let Some(p) = sample.iter().find(|p| p.dims() != dims) {
        return Err(Error::DimensionMismatch {
            expected: dims,
            found: p.dims(),
        });
    }
    let mut sort_dim = 0;
    let mut best = 0;
    for axis in 0..dims {
        let distinct = distinct_count(sample, axis);
        if distinct >= best {
            best = distinct;
            sort_dim = axis;
        }
    }
    let cells = sample.len() as f64 / target_cell_load as f64;
    let per_axis = cells.powf(1.0 / (dims - 1) as f64).round().max(1.0) as usize;
    let mut spec = PartitionSpec::uniform(dims, sort_dim, per_axis)?;
    spec.source = SpecSource::Heuristic;
    Ok(spec)
}

/// `Π x_d · Σ x_d` and `D · N · log2 N` for a layout.
pub fn assumption2_terms(counts: &[usize], n: usize) -> (f64, f64) {
    let prod: f64 = counts.iter().map(|&x| x as f64).product();
    let sum: f64 = counts.iter().map(|&x| x as f64).sum();
    let rhs = if n == 0 {
        0.0
    } else {
        counts.len() as f64 * n as f64 * (n as f64).log2()
    };
    (prod * sum, rhs)
}

/// Mean per-query cost (cells visited + entries range-scanned + entries
/// filtered) of `spec` on a throwaway build of `data`. Also returns the
/// effective slab counts the build realized.
pub fn simulated_cost(
    spec: &PartitionSpec,
    data: &[Point],
    queries: &[QueryBox],
) -> Result<(f64, Vec<usize>)> {
    let dims = spec.dims();
    let index = GridIndex::build(dims, data.iter().cloned(), spec)?;
    let mut total = 0u64;
    for q in queries {
        let s = index.search_with(q, |_| {})?;
        total += s.cells_visited + s.entries_scanned + s.entries_filtered;
    }
    let effective = index.layout().slab_counts();
    Ok((total as f64 / queries.len().max(1) as f64, effective))
}

fn neighbours(spec: &PartitionSpec) -> Vec<PartitionSpec> {
    let dims = spec.dims();
    let mut out = Vec::new();
    let mut push = |counts: Vec<usize>, sort_dim: usize| {
        let cand = PartitionSpec {
            sort_dim,
            counts,
            source: SpecSource::CostModel,
        };
        if cand.validate(dims).is_ok() && cand.counts != spec.counts {
            out.push(cand);
        }
    };
    for axis in (0..dims).filter(|&a| a != spec.sort_dim) {
        let x = spec.counts[axis];
        for next in [x * 2, (x / 2).max(1), x + 1, x.saturating_sub(1).max(1)] {
            let mut counts = spec.counts.clone();
            counts[axis] = next;
            push(counts, spec.sort_dim);
        }
    }
    for axis in (0..dims).filter(|&a| a != spec.sort_dim) {
        // hand the sort role to `axis`, which gives its slabs to the old sort axis
        let mut counts = spec.counts.clone();
        counts.swap(axis, spec.sort_dim);
        push(counts, axis);
    }
    out
}

/// Steepest descent over slab counts and sort axis, scored by
/// [`simulated_cost`]. `budget` counts cost evaluations, including the one
/// for `spec0`; the evaluation order does not depend on the budget, so more
/// budget never returns a costlier spec. Candidates violating
/// `Π x_d · Σ x_d <= D · n · log2 n` at sample scale are never scored.
pub fn cost_model_refine(
    spec0: &PartitionSpec,
    data: &[Point],
    queries: &[QueryBox],
    budget: usize,
) -> Result<PartitionSpec> {
    spec0.validate(spec0.dims())?;
    if queries.is_empty() || data.is_empty() || budget <= 1 {
        return Ok(spec0.clone());
    }
    let satisfies = |s: &PartitionSpec| {
        let (lhs, rhs) = assumption2_terms(&s.counts, data.len());
        lhs <= rhs
    };
    let (mut best_cost, effective) = simulated_cost(spec0, data, queries)?;
    let mut best = PartitionSpec {
        counts: effective,
        ..spec0.clone()
    };
    let mut evaluations = 1;
    let mut seen = vec![best.clone(), spec0.clone()];
    'descent: loop {
        let mut improved = false;
        let centre = best.clone();
        for cand in neighbours(&centre) {
            if seen
                .iter()
                .any(|s| s.sort_dim == cand.sort_dim && s.counts == cand.counts)
            {
                continue;
            }
            seen.push(cand.clone());
            if !satisfies(&cand) {
                continue;
            }
            if evaluations >= budget {
                break 'descent;
            }
            let (cost, effective) = simulated_cost(&cand, data, queries)?;
            evaluations += 1;
            if cost < best_cost {
                best_cost = cost;
                best = PartitionSpec {
                    counts: effective,
                    ..cand
                };
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    if best.counts != spec0.counts || best.sort_dim != spec0.sort_dim {
        best.source = SpecSource::CostModel;
    } else {
        best.source = spec0.source;
    }
    Ok(best)
}
