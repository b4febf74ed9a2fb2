//! A grid index for orthogonal range queries over points in R^D whose
//! per-axis partitions repair themselves (split, merge, equalize) as the
//! data distribution drifts under inserts and erases.
//!
//! The crate also ships the two comparison structures (a grid that never
//! re-partitions and a delta-buffered grid that is periodically rebuilt),
//! workload generators, a brute-force oracle and the benchmark harness
//! driving the `flexgrid` binary.

pub mod bench;
pub mod error;
pub mod grid;
pub mod oracle;
pub mod point;
pub mod repartition;
pub mod tuner;
pub mod variants;
pub mod workload;

pub use error::{Error, Result};
pub use grid::{
    EraseOutcome, GridIndex, GridLayout, IndexStats, InsertOutcome, OpCounters, SearchSummary,
};
pub use point::{Point, QueryBox};
pub use repartition::{EventKind, RepartitionConfig, RepartitionEvent, SlabReference, Thresholds};
pub use tuner::{PartitionSpec, SpecSource};
pub use variants::{IndexVariant, VariantKind};
