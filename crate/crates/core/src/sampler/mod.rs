//! Balanced, nested catalog subsets.
//!
//! The pipeline is:
//!
//! 1. [`quantile_bin`] / [`category_bin`]: map every record to one bin per
//!    balancing attribute.
//! 2. [`rake`]: iterative proportional fitting of per-record weights so each
//!    attribute's weighted bin masses are uniform.
//! 3. [`weighted_permutation`]: one weighted draw order without replacement.
//! 4. [`nested_subsets`]: prefixes of that order, so every smaller subset is
//!    contained in every larger one.

mod binning;
mod nesting;
mod permutation;
mod raking;

pub use binning::{bins_for_schema, category_bin, quantile_bin, BinAssignment, BinEdges};
pub use nesting::{nested_subsets, SubsetChain};
pub use permutation::{weighted_permutation, weighted_permutation_from};
pub use raking::{marginal_deviation, rake, rake_with_targets, weighted_marginal, CalibratedWeights, RakeOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error("bin count must be >= 1")]
    ZeroBins,
    #[error("attribute {attribute} missing on record {record}")]
    MissingAttribute { attribute: String, record: String },
    #[error("attribute {0} is not declared in the schema")]
    UnknownAttribute(String),
    #[error("raking needs at least one attribute")]
    NoAttributes,
    #[error("attribute {attribute}: expected {expected} records, found {found}")]
    LengthMismatch { attribute: String, expected: usize, found: usize },
    #[error("attribute {attribute}: record {record} is assigned to no bin")]
    Unassigned { attribute: String, record: usize },
    #[error("attribute {0} has no nonempty bin")]
    NoNonemptyBin(String),
    #[error("attribute {attribute}: invalid target marginal ({reason})")]
    InvalidTarget { attribute: String, reason: String },
    #[error("all weights collapsed to zero")]
    WeightsCollapsed,
    #[error("at least one strictly positive weight is required")]
    NoPositiveWeight,
    #[error("weights must be finite and nonnegative")]
    InvalidWeight,
    #[error("subset size {size} exceeds catalog size {available}")]
    SizeTooLarge { size: usize, available: usize },
    #[error("subset sizes must be strictly ascending")]
    SizesNotAscending,
    #[error("tolerance must be positive and max_iterations >= 1")]
    InvalidOptions,
}

pub type Result<T> = std::result::Result<T, SamplerError>;
