use serde::{Deserialize, Serialize};

use super::report::{RunReport, VariantReport};
use crate::error::{Error, Result};

/// Observed events may exceed the bound by this factor.
pub const EVENT_SLACK: f64 = 1.1;
/// The second-half amortized constant may exceed the first-half fit by this
/// fraction.
pub const CONSTANT_SLACK: f64 = 0.25;

/// Upper bound on re-partition events on one axis over `k` updates, with
/// `x` the mean slab count on the axis, `n` the mean point count and `delta`
/// the net insert fraction.
pub fn event_bound(k: u64, x: f64, n: f64, delta: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    k as f64 * ((5.0 + delta) * x - 3.0 * delta - 5.0 * delta * delta) / (4.0 * n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisAudit {
    pub axis: usize,
    pub mean_slabs: f64,
    pub events: u64,
    pub bound: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantAudit {
    pub name: String,
    pub updates: u64,
    pub mean_len: f64,
    pub delta: f64,
    pub axes: Vec<AxisAudit>,
    /// Container ops per update over `D * log2(mean len)`.
    pub amortized_constant: f64,
    pub half_constants: [f64; 2],
    /// Second-half container ops per update stay within the first-half fit
    /// plus [`CONSTANT_SLACK`].
    pub constant_holds: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub variants: Vec<VariantAudit>,
    pub pass: bool,
}

fn normalized(ops_per_update: f64, dims: usize, mean_len: f64) -> f64 {
    let log = mean_len.max(2.0).log2();
    ops_per_update / (dims as f64 * log)
}

/// Net insert fraction over the run, clamped to `[0, 1]`.
pub fn estimate_delta(v: &VariantReport) -> f64 {
    let a = &v.amortized;
    if a.updates == 0 {
        return 0.0;
    }
    ((a.final_len as f64 - a.initial_len as f64) / a.updates as f64).clamp(0.0, 1.0)
}

fn audit_variant(v: &VariantReport, sort_dim: usize, delta: Option<f64>) -> VariantAudit {
    let a = &v.amortized;
    let dims = a.mean_slab_counts.len();
    let delta = delta.unwrap_or_else(|| estimate_delta(v));
    let axes: Vec<AxisAudit> = (0..dims)
        .filter(|&axis| axis != sort_dim)
        .map(|axis| {
            let x = a.mean_slab_counts[axis];
            let bound = event_bound(a.updates, x, a.mean_len, delta);
            let events = v.events.per_axis.get(axis).copied().unwrap_or(0);
            AxisAudit {
                axis,
                mean_slabs: x,
                events,
                bound,
                within: events as f64 <= EVENT_SLACK * bound.max(0.0),
            }
        })
        .collect();
    let halves = a
        .halves
        .map(|h| normalized(h.ops_per_update, dims, h.mean_len));
    let constant_holds = halves[1] <= (1.0 + CONSTANT_SLACK) * halves[0];
    VariantAudit {
        name: v.name.clone(),
        updates: a.updates,
        mean_len: a.mean_len,
        delta,
        pass: constant_holds && axes.iter().all(|x| x.within),
        constant_holds,
        axes,
        amortized_constant: normalized(a.ops_per_update, dims, a.mean_len),
        half_constants: halves,
    }
}

/// Checks per-axis event counts against the bound. `delta` defaults to the
/// net insert fraction each variant observed.
pub fn audit(report: &RunReport, delta: Option<f64>) -> Result<AuditReport> {
    if let Some(d) = delta {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::Config {
                path: "delta".into(),
                message: format!("must be in [0, 1], got {d}"),
            });
        }
    }
    let variants: Vec<VariantAudit> = report
        .variants
        .iter()
        .map(|v| audit_variant(v, report.partition.sort_dim, delta))
        .collect();
    Ok(AuditReport {
        pass: variants.iter().all(|v| v.pass),
        variants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_formula() {
        // k (5 x) / (4 n) when nothing is net-inserted
        assert_eq!(event_bound(1000, 8.0, 100.0, 0.0), 100.0);
        // (6 * 8 - 3 - 5) / 400 * 1000
        assert_eq!(event_bound(1000, 8.0, 100.0, 1.0), 100.0);
        assert_eq!(event_bound(10, 4.0, 0.0, 0.5), 0.0);
    }

    #[test]
    fn delta_out_of_range() {
        let report = crate::bench::run(&crate::bench::tests::tiny_config()).unwrap();
        assert!(audit(&report, Some(1.5)).is_err());
        assert!(audit(&report, Some(-0.1)).is_err());
        let a = audit(&report, Some(0.0)).unwrap();
        assert_eq!(a.variants.len(), 3);
        assert_eq!(a.variants[0].axes.len(), 2);
    }
}
