//! The finite partition space of a node: the trivial partition plus one
//! axis-aligned midpoint split per adjacent pair of distinct sorted values in
//! each dimension, scored by Dirichlet-multinomial marginal likelihood times
//! a depth-dependent partition prior.

mod dirichlet;
mod importance;
mod prior;
pub(crate) mod search;

pub use dirichlet::{dm_marginal_loglike, DirichletMultinomial, DirichletParams, LikelihoodModel};
pub use importance::{dimension_importance, DimensionImportance};
pub use prior::{partition_log_prior, PartitionKind, PriorConfig, PriorKind};
pub use search::{
    enumerate_partitions_classification, enumerate_partitions_general, find_modal_partition_classification,
    find_modal_partition_general, midpoint, Candidate, Partition, PartitionChoice,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("partition search on an empty subset")]
    EmptyInput,
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("Dirichlet parameters must be finite and positive, got {0:?}")]
    InvalidParams(Vec<f64>),
    #[error("split-continuation base g must lie in (0, 1), got {0}")]
    InvalidBase(f64),
}
