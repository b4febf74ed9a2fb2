use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{prepare, run_variant, write_json, BenchConfig, Prepared};
use crate::error::{Error, Result};
use crate::workload::{gen_search_trace, read_trace, RecordKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadOnlyVariant {
    pub name: String,
    pub searches: u64,
    pub total_seconds: f64,
    pub mean_seconds: f64,
    pub samples_ns: Vec<u64>,
    pub result_checksum: u64,
    pub events: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadOnlyReport {
    pub searches: usize,
    pub identical_results: bool,
    pub variants: Vec<ReadOnlyVariant>,
}

/// Times a search-only trace. A configured trace file must not contain
/// updates.
pub fn readonly(config: &BenchConfig) -> Result<ReadOnlyReport> {
    let mut prepared: Prepared = match &config.trace_file {
        Some(path) => {
            let trace = read_trace(path, config.workload.dims)?;
            if trace.iter().any(|op| op.is_update()) {
                return Err(Error::Config {
                    path: "trace_file".into(),
                    message: format!("{} contains updates", path.display()),
                });
            }
            prepare(config)?
        }
        None => prepare(config)?,
    };
    if config.trace_file.is_none() {
        prepared.trace = gen_search_trace(&prepared.workload)?;
    }
    let mut variants = Vec::new();
    let mut digests = Vec::new();
    for kind in config.variant_kinds() {
        let run = run_variant(kind, &prepared, config.repartition, config.warmup_searches)?;
        let samples_ns: Vec<u64> = run
            .log
            .records
            .iter()
            .filter(|r| r.kind == RecordKind::Search)
            .map(|r| r.nanos)
            .collect();
        let total = samples_ns.iter().sum::<u64>() as f64 * 1e-9;
        digests.push(run.log.search_digests());
        variants.push(ReadOnlyVariant {
            name: run.report.name.clone(),
            searches: samples_ns.len() as u64,
            total_seconds: total,
            mean_seconds: total / samples_ns.len().max(1) as f64,
            samples_ns,
            result_checksum: run.report.result_checksum,
            events: run.report.events.total(),
        });
    }
    Ok(ReadOnlyReport {
        searches: prepared.trace.len(),
        identical_results: digests.windows(2).all(|w| w[0] == w[1]),
        variants,
    })
}

/// Writes `readonly.json`; fails with the gate error after writing when the
/// variants disagree.
pub fn write_readonly(report: &ReadOnlyReport, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    write_json(&out.join("readonly.json"), report)?;
    if !report.identical_results {
        return Err(Error::CorrectnessGate(
            "read-only search results differ".into(),
        ));
    }
    Ok(())
}
