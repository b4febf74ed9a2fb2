use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{prepare, run_variant, write_json, BenchConfig, Prepared};
use crate::error::{Error, Result};
use crate::repartition::{RepartitionConfig, Thresholds};
use crate::variants::VariantKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// False when the pair violates `0 < beta < 1 < alpha`; such cells are
    /// not run.
    pub valid: bool,
    pub search_seconds: Option<f64>,
    pub update_seconds: Option<f64>,
    /// Change relative to the baseline in percent; negative is faster.
    pub search_pct: Option<f64>,
    pub update_pct: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub baseline: SweepCell,
    pub cells: Vec<SweepCell>,
}

fn timed(prepared: &Prepared, config: &BenchConfig, thresholds: Thresholds) -> Result<(f64, f64)> {
    let repartition = RepartitionConfig {
        thresholds,
        ..config.repartition
    };
    let mut best = (f64::INFINITY, f64::INFINITY);
    for _ in 0..config.sweep.repeats.max(1) {
        let run = run_variant(
            VariantKind::Flexflood,
            prepared,
            repartition,
            config.warmup_searches,
        )?;
        best.0 = best.0.min(run.report.search_seconds);
        best.1 = best.1.min(run.report.update_seconds);
    }
    Ok(best)
}

fn pct(value: f64, base: f64) -> f64 {
    if base > 0.0 {
        (value - base) / base * 100.0
    } else {
        0.0
    }
}

/// Times the self-repairing grid over an `alpha` x `beta` grid with gamma at
/// the midpoint, against the default thresholds.
pub fn sweep(config: &BenchConfig) -> Result<SweepReport> {
    let prepared = prepare(config)?;
    let base_t = Thresholds::default();
    let mut measured: Vec<(Thresholds, (f64, f64))> = Vec::new();
    let mut cells = Vec::new();
    for &alpha in &config.sweep.alphas {
        for &beta in &config.sweep.betas {
            let cell = match Thresholds::new(alpha, beta) {
                Err(_) => SweepCell {
                    alpha,
                    beta,
                    gamma: (alpha + beta) / 2.0,
                    valid: false,
                    search_seconds: None,
                    update_seconds: None,
                    search_pct: None,
                    update_pct: None,
                },
                Ok(t) => {
                    let (s, u) = timed(&prepared, config, t)?;
                    measured.push((t, (s, u)));
                    SweepCell {
                        alpha,
                        beta,
                        gamma: t.gamma,
                        valid: true,
                        search_seconds: Some(s),
                        update_seconds: Some(u),
                        search_pct: None,
                        update_pct: None,
                    }
                }
            };
            cells.push(cell);
        }
    }
    let (bs, bu) = match measured.iter().find(|(t, _)| *t == base_t) {
        Some(&(_, m)) => m,
        None => timed(&prepared, config, base_t)?,
    };
    for c in cells.iter_mut().filter(|c| c.valid) {
        c.search_pct = c.search_seconds.map(|s| pct(s, bs));
        c.update_pct = c.update_seconds.map(|u| pct(u, bu));
    }
    let baseline = SweepCell {
        alpha: base_t.alpha,
        beta: base_t.beta,
        gamma: base_t.gamma,
        valid: true,
        search_seconds: Some(bs),
        update_seconds: Some(bu),
        search_pct: Some(0.0),
        update_pct: Some(0.0),
    };
    Ok(SweepReport { baseline, cells })
}

fn write_heatmap(
    path: &Path,
    report: &SweepReport,
    value: impl Fn(&SweepCell) -> Option<f64>,
) -> Result<()> {
    let mut betas: Vec<f64> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    for c in &report.cells {
        if !betas.contains(&c.beta) {
            betas.push(c.beta);
        }
        if !alphas.contains(&c.alpha) {
            alphas.push(c.alpha);
        }
    }
    let io = |e: csv::Error| Error::Io(e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["alpha\\beta".to_string()];
    header.extend(betas.iter().map(|b| b.to_string()));
    w.write_record(&header).map_err(io)?;
    for &a in &alphas {
        let mut row = vec![a.to_string()];
        for &b in &betas {
            let v = report
                .cells
                .iter()
                .find(|c| c.alpha == a && c.beta == b)
                .and_then(&value);
            row.push(v.map_or(String::new(), |v| format!("{v:.2}")));
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `sweep.json` and percentage-change heatmaps for search and update
/// time; invalid cells are left blank.
pub fn write_sweep(report: &SweepReport, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    write_heatmap(&out.join("sweep_search_pct.csv"), report, |c| c.search_pct)?;
    write_heatmap(&out.join("sweep_update_pct.csv"), report, |c| c.update_pct)?;
    write_json(&out.join("sweep.json"), report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{tests::tiny_config, SweepGrid};

    #[test]
    fn invalid_cells_marked_and_baseline_reused() {
        let mut config = tiny_config();
        config.variants = vec![crate::bench::VariantName::Flexflood];
        config.sweep = SweepGrid {
            alphas: vec![0.9, 2.0],
            betas: vec![1.0 / 3.0],
            repeats: 1,
        };
        let report = sweep(&config).unwrap();
        assert!(!report.cells[0].valid);
        assert!(report.cells[0].search_pct.is_none());
        assert_eq!(report.cells[1].search_pct, Some(0.0));
        let dir = tempfile::tempdir().unwrap();
        write_sweep(&report, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("sweep_search_pct.csv")).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "0.9,");
    }
}
