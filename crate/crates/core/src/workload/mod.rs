//! Workload generation: a drifting normal distribution with alternating
//! blocks of update and search queries, plus trace files, CSV ingestion and
//! trace replay.

mod csv_io;
mod replay;
mod trace;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use csv_io::{ingest_csv, write_csv, CsvIngest};
pub use replay::{replay, result_digest, LiveSet, OpRecord, RecordKind, ReplayLog};
pub use trace::{format_trace, parse_trace, read_trace, write_trace};

use crate::error::{Error, Result};
use crate::point::{Point, QueryBox};

const TRACE_STREAM: u64 = 0x7472_6163_6500_0001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadSpec {
    pub dims: usize,
    /// Initial point count `N0`.
    pub initial: usize,
    /// Total query count `Q`.
    pub queries: usize,
    /// Queries alternate between update and search every `block` queries,
    /// starting with updates.
    pub block: usize,
    pub mu0: f64,
    pub sigma: f64,
    /// Shift of the insert mean reached at the last query.
    pub drift_total: f64,
    /// Query placement box; a single value applies to every axis.
    pub domain_lo: Vec<f64>,
    pub domain_hi: Vec<f64>,
    /// Query side lengths are uniform on `(0, max_side)` per axis.
    pub max_side: f64,
    /// Target mean selectivity; when set, `max_side` is calibrated against
    /// the initial data instead.
    pub sel_target: Option<f64>,
    pub seed: u64,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            dims: 3,
            initial: 100_000,
            queries: 2_000_000,
            block: 10_000,
            mu0: 3e8,
            sigma: 1e8,
            drift_total: 4e8,
            domain_lo: vec![0.0],
            domain_hi: vec![1e9],
            max_side: 3e8,
            sel_target: None,
            seed: 0,
        }
    }
}

impl WorkloadSpec {
    /// The drifting-normal dataset at its full published scale.
    pub fn normal_drift() -> Self {
        Self::default()
    }

    /// Same distribution and drift at 1/10 the data and queries, with
    /// blocks of 10^3.
    pub fn desk_scale() -> Self {
        WorkloadSpec {
            initial: 10_000,
            queries: 200_000,
            block: 1_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidWorkload(m));
        if self.dims < 2 {
            return Err(Error::TooFewDimensions(self.dims));
        }
        if self.block < 1 {
            return bad("block must be at least 1".into());
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !self.mu0.is_finite() || !self.drift_total.is_finite() || !self.max_side.is_finite() {
            return bad("mu0, drift_total and max_side must be finite".into());
        }
        if self.max_side <= 0.0 {
            return bad("max_side must be positive".into());
        }
        if let Some(t) = self.sel_target {
            if !(t > 0.0 && t <= 1.0) {
                return bad(format!("sel_target must be in (0, 1], got {t}"));
            }
        }
        for axis in 0..self.dims {
            let (lo, hi) = self.domain(axis)?;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("domain on axis {axis} is empty"));
            }
        }
        Ok(())
    }

    fn bound(values: &[f64], axis: usize, dims: usize) -> Result<f64> {
        match values.len() {
            1 => Ok(values[0]),
            n if n == dims => Ok(values[axis]),
            n => Err(Error::InvalidWorkload(format!(
                "domain bound has {n} entries, expected 1 or {dims}"
            ))),
        }
    }

    pub fn domain(&self, axis: usize) -> Result<(f64, f64)> {
        Ok((
            Self::bound(&self.domain_lo, axis, self.dims)?,
            Self::bound(&self.domain_hi, axis, self.dims)?,
        ))
    }

    /// Mean of inserted coordinates at query `i`.
    pub fn insert_mean(&self, i: usize) -> f64 {
        if self.queries == 0 {
            return self.mu0;
        }
        self.mu0 + self.drift_total * i as f64 / self.queries as f64
    }

    /// Query `i` is an update when `floor(i / block)` is even.
    pub fn is_update(&self, i: usize) -> bool {
        (i / self.block).is_multiple_of(2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceOp {
    Search(QueryBox),
    Insert(Point),
    /// Erase a live point drawn uniformly at replay time.
    EraseRandomLive,
}

impl TraceOp {
    pub fn is_update(&self) -> bool {
        !matches!(self, TraceOp::Search(_))
    }
}

fn normal_point(rng: &mut ChaCha8Rng, dist: &Normal<f64>, dims: usize) -> Point {
    let coords: Vec<f64> = (0..dims).map(|_| dist.sample(rng)).collect();
    Point::new(coords).expect("normal samples are finite")
}

/// `N0` points with i.i.d. `Normal(mu0, sigma)` coordinates, deduplicated in
/// generation order.
pub fn gen_initial(spec: &WorkloadSpec) -> Result<Vec<Point>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dist =
        Normal::new(spec.mu0, spec.sigma).map_err(|e| Error::InvalidWorkload(e.to_string()))?;
    let mut seen = std::collections::HashSet::with_capacity(spec.initial);
    let mut out = Vec::with_capacity(spec.initial);
    while out.len() < spec.initial {
        let p = normal_point(&mut rng, &dist, spec.dims);
        if seen.insert(p.clone()) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Uniformly placed box generator shared by traces and calibration.
struct BoxGen {
    domains: Vec<(f64, f64)>,
    max_side: f64,
}

impl BoxGen {
    fn new(spec: &WorkloadSpec, max_side: f64) -> Result<Self> {
        let domains = (0..spec.dims)
            .map(|a| spec.domain(a))
            .collect::<Result<_>>()?;
        Ok(BoxGen { domains, max_side })
    }

    fn sample(&self, rng: &mut impl Rng) -> QueryBox {
        let dims = self.domains.len();
        let mut lo = Vec::with_capacity(dims);
        let mut hi = Vec::with_capacity(dims);
        for &(dlo, dhi) in &self.domains {
            let side = (rng.random::<f64>() * self.max_side).min(dhi - dlo);
            let start = dlo + rng.random::<f64>() * (dhi - dlo - side);
            lo.push(start);
            hi.push((start + side).min(dhi));
        }
        QueryBox::from_coords(&lo, &hi).expect("generated box is valid")
    }
}

/// The `Q`-query trace: update blocks (fair coin between an insert drawn
/// from the drifted normal and an erase of a random live point) alternating
/// with search blocks.
pub fn gen_trace(spec: &WorkloadSpec) -> Result<Vec<TraceOp>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ TRACE_STREAM);
    let boxes = BoxGen::new(spec, spec.max_side)?;
    let mut out = Vec::with_capacity(spec.queries);
    for i in 0..spec.queries {
        if spec.is_update(i) {
            if rng.random_bool(0.5) {
                let dist = Normal::new(spec.insert_mean(i), spec.sigma)
                    .map_err(|e| Error::InvalidWorkload(e.to_string()))?;
                out.push(TraceOp::Insert(normal_point(&mut rng, &dist, spec.dims)));
            } else {
                out.push(TraceOp::EraseRandomLive);
            }
        } else {
            out.push(TraceOp::Search(boxes.sample(&mut rng)));
        }
    }
    Ok(out)
}

/// `Q` searches and no updates.
pub fn gen_search_trace(spec: &WorkloadSpec) -> Result<Vec<TraceOp>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ TRACE_STREAM);
    let boxes = BoxGen::new(spec, spec.max_side)?;
    Ok((0..spec.queries)
        .map(|_| TraceOp::Search(boxes.sample(&mut rng)))
        .collect())
}

/// Mean fraction of `sample` covered by boxes drawn with side bound `max_side`.
pub fn mean_selectivity(
    spec: &WorkloadSpec,
    sample: &[Point],
    max_side: f64,
    boxes: usize,
) -> Result<f64> {
    if sample.is_empty() || boxes == 0 {
        return Ok(0.0);
    }
    let gen = BoxGen::new(spec, max_side)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0xCA11);
    let mut hits = 0usize;
    for _ in 0..boxes {
        let q = gen.sample(&mut rng);
        hits += sample.iter().filter(|p| q.contains(p)).count();
    }
    Ok(hits as f64 / (boxes * sample.len()) as f64)
}

/// Bisects the side bound so generated boxes cover `sel_target` of the sample
/// on average. Returns the configured `max_side` when no target is set.
pub fn calibrate_max_side(spec: &WorkloadSpec, sample: &[Point]) -> Result<f64> {
    spec.validate()?;
    let Some(target) = spec.sel_target else {
        return Ok(spec.max_side);
    };
    if sample.is_empty() {
        return Ok(spec.max_side);
    }
    let step = (sample.len() / 2000).max(1);
    let sample: Vec<Point> = sample.iter().step_by(step).cloned().collect();
    let width = (0..spec.dims)
        .map(|a| spec.domain(a).map(|(lo, hi)| hi - lo))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, 2.0 * width);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if mean_selectivity(spec, &sample, mid, 200)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> WorkloadSpec {
        WorkloadSpec {
            initial: 500,
            queries: 10_000,
            block: 100,
            seed: 42,
            ..WorkloadSpec::default()
        }
    }

    #[test]
    fn parity_rule() {
        let spec = WorkloadSpec::default();
        assert!(spec.is_update(0));
        assert!(!spec.is_update(spec.block));
        assert!(spec.is_update(2 * spec.block));
        assert!(spec.is_update(spec.block - 1));
        let trace = gen_trace(&small()).unwrap();
        for (i, op) in trace.iter().enumerate() {
            assert_eq!(op.is_update(), (i / 100) % 2 == 0, "op {i}");
        }
    }

    #[test]
    fn drift_reaches_mu0_plus_total() {
        let spec = WorkloadSpec::default();
        assert_eq!(spec.insert_mean(0), 3e8);
        assert_eq!(spec.insert_mean(spec.queries), 7e8);
        assert_eq!(spec.insert_mean(spec.queries / 2), 5e8);
    }

    #[test]
    fn empty_initial() {
        let spec = WorkloadSpec {
            initial: 0,
            ..small()
        };
        assert!(gen_initial(&spec).unwrap().is_empty());
    }

    #[test]
    fn sample_mean_within_four_standard_errors() {
        let spec = WorkloadSpec {
            initial: 100_000,
            ..small()
        };
        let pts = gen_initial(&spec).unwrap();
        assert_eq!(pts.len(), 100_000);
        let tol = 4.0 * spec.sigma / (pts.len() as f64).sqrt();
        for axis in 0..3 {
            let mean = pts.iter().map(|p| p.get(axis)).sum::<f64>() / pts.len() as f64;
            assert!((mean - spec.mu0).abs() < tol, "axis {axis} mean {mean}");
        }
    }

    #[test]
    fn boxes_inside_domain_with_bounded_sides() {
        let spec = WorkloadSpec {
            queries: 20_000,
            block: 1,
            ..small()
        };
        let mut n = 0;
        for op in gen_trace(&spec).unwrap() {
            if let TraceOp::Search(q) = op {
                n += 1;
                for a in 0..3 {
                    let (l, h) = (q.lo().get(a), q.hi().get(a));
                    assert!(0.0 <= l && l <= h && h <= 1e9);
                    assert!(h - l < 3e8);
                }
            }
        }
        assert_eq!(n, 10_000);
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        assert_eq!(gen_trace(&small()).unwrap(), gen_trace(&small()).unwrap());
        assert_eq!(
            gen_initial(&small()).unwrap(),
            gen_initial(&small()).unwrap()
        );
        let other = WorkloadSpec {
            seed: 43,
            ..small()
        };
        assert_ne!(gen_trace(&small()).unwrap(), gen_trace(&other).unwrap());
    }

    #[test]
    fn calibration_hits_selectivity_target() {
        let spec = WorkloadSpec {
            initial: 4000,
            sel_target: Some(0.001),
            ..small()
        };
        let pts = gen_initial(&spec).unwrap();
        let side = calibrate_max_side(&spec, &pts).unwrap();
        let sel = mean_selectivity(&spec, &pts, side, 200).unwrap();
        assert!(
            (sel - 0.001).abs() < 0.0005,
            "selectivity {sel} at side {side}"
        );
    }

    #[test]
    fn validation() {
        assert!(WorkloadSpec {
            sigma: 0.0,
            ..small()
        }
        .validate()
        .is_err());
        assert!(WorkloadSpec {
            block: 0,
            ..small()
        }
        .validate()
        .is_err());
        assert!(WorkloadSpec {
            domain_lo: vec![5.0],
            domain_hi: vec![5.0],
            ..small()
        }
        .validate()
        .is_err());
        assert!(WorkloadSpec {
            domain_lo: vec![0.0, 0.0],
            ..small()
        }
        .validate()
        .is_err());
    }
}
