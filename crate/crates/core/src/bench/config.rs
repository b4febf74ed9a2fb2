use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repartition::RepartitionConfig;
use crate::tuner::{PartitionSpec, DEFAULT_TARGET_CELL_LOAD};
use crate::variants::VariantKind;
use crate::workload::WorkloadSpec;

pub const SEED_ENV: &str = "FLEXGRID_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Flexflood,
    UpdatableFlood,
    DeltaBuffer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Runs per cell; the fastest is kept.
    pub repeats: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            alphas: vec![1.5, 1.75, 2.0, 2.5, 3.0],
            betas: vec![0.1, 0.2, 1.0 / 3.0, 0.4, 0.5],
            repeats: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub workload: WorkloadSpec,
    /// Replay this trace instead of generating one.
    pub trace_file: Option<PathBuf>,
    /// Load the initial points from CSV instead of generating them.
    pub initial_csv: Option<PathBuf>,
    pub csv_has_header: bool,
    /// Explicit layout; derived from the initial data when absent.
    pub partition: Option<PartitionSpec>,
    pub target_cell_load: usize,
    /// Cost evaluations for layout refinement; 0 or 1 keeps the heuristic.
    pub refine_budget: usize,
    pub refine_queries: usize,
    pub repartition: RepartitionConfig,
    pub variants: Vec<VariantName>,
    /// Delta-buffer rebuild period; defaults to the workload block size.
    pub delta_k: Option<usize>,
    /// Overrides `workload.seed`.
    pub seed: Option<u64>,
    /// Untimed searches before each replay.
    pub warmup_searches: usize,
    /// Replays per variant, interleaved across variants; reported times are
    /// medians.
    pub repeats: usize,
    pub sweep: SweepGrid,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            workload: WorkloadSpec::default(),
            trace_file: None,
            initial_csv: None,
            csv_has_header: false,
            partition: None,
            target_cell_load: DEFAULT_TARGET_CELL_LOAD,
            refine_budget: 0,
            refine_queries: 200,
            repartition: RepartitionConfig::default(),
            variants: vec![
                VariantName::Flexflood,
                VariantName::UpdatableFlood,
                VariantName::DeltaBuffer,
            ],
            delta_k: None,
            seed: None,
            warmup_searches: 100,
            repeats: 1,
            sweep: SweepGrid::default(),
        }
    }
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: BenchConfig =
            serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut config = Self::from_json(&text)?;
        // relative data paths resolve against the config file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.trace_file, &mut config.initial_csv]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let config_err = |path: &str, message: String| Error::Config {
            path: path.into(),
            message,
        };
        self.workload
            .validate()
            .map_err(|e| config_err("workload", e.to_string()))?;
        self.repartition
            .thresholds
            .validate()
            .map_err(|e| config_err("repartition.thresholds", e.to_string()))?;
        if let Some(spec) = &self.partition {
            spec.validate(self.workload.dims)
                .map_err(|e| config_err("partition", e.to_string()))?;
        }
        if self.target_cell_load == 0 {
            return Err(config_err("target_cell_load", "must be at least 1".into()));
        }
        if self.variants.is_empty() {
            return Err(config_err("variants", "no variants selected".into()));
        }
        if self.delta_k == Some(0) {
            return Err(config_err("delta_k", "must be at least 1".into()));
        }
        Ok(())
    }

    /// Seed in effect: the environment override, then `seed`, then the
    /// workload's own.
    pub fn resolved_seed(&self) -> Result<u64> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            return v.trim().parse().map_err(|e| Error::Config {
                path: SEED_ENV.into(),
                message: format!("{v:?}: {e}"),
            });
        }
        Ok(self.seed.unwrap_or(self.workload.seed))
    }

    pub fn variant_kinds(&self) -> Vec<VariantKind> {
        let k = self.delta_k.unwrap_or(self.workload.block);
        self.variants
            .iter()
            .map(|v| match v {
                VariantName::Flexflood => VariantKind::Flexflood,
                VariantName::UpdatableFlood => VariantKind::UpdatableFlood,
                VariantName::DeltaBuffer => VariantKind::DeltaBuffer { k },
            })
            .collect()
    }
}
