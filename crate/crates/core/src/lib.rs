//! Planning and analysis toolkit for large-scale remote-sensing pretraining.
//!
//! The crate covers five workflows:
//!
//! - [`catalog`] and [`sampler`]: ingest image manifests, bin their balancing
//!   attributes, rake sampling weights toward uniform marginals and draw nested
//!   subsets without replacement.
//! - [`schedule`]: warmup-stable-decay learning rates and fail-fast triage of
//!   candidate base rates from short warmup runs.
//! - [`scaling`]: power-law fits of converged loss against data or parameter
//!   scale, trapped-run detection, dataset-size planning and batch-size
//!   tradeoff fits.
//! - [`simulator`]: synthetic run telemetry with known ground truth, used to
//!   exercise the analysis code end to end.
//! - [`labelgen`]: weak labels from tagged vector geometry (footprints, clipping,
//!   rasterized masks and rotated boxes).

// `!(x > 0.0)` is used deliberately so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod labelgen;
pub mod runlog;
pub mod sampler;
pub mod scaling;
pub mod schedule;
pub mod seed;
pub mod simulator;
pub mod stats;

pub use catalog::{AttributeKind, AttributeSchema, AttributeSpec, Catalog, ImageRecord};
pub use runlog::{LogEntry, RunLog};
pub use sampler::{BinAssignment, CalibratedWeights, SubsetChain};
pub use scaling::{BatchTradeoffFit, FloorMode, PowerLawFit, ScalingMode, ScalingPoint};
pub use schedule::{TriagePolicy, TriageVerdict, WsdSchedule};
pub use simulator::{EnsembleConfig, PowerLaw, SimConfig, SimMode};
