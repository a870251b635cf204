use serde::{Deserialize, Serialize};

use super::dirichlet::DirichletParams;
use super::prior::PriorConfig;
use super::search::{enumerate_partitions_classification, Partition};
use super::PartitionError;
use crate::data::SubsetView;

/// Posterior mass of the trivial partition and of all splits along each
/// dimension, normalised over the node's partition space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionImportance {
    pub trivial: f64,
    pub dims: Vec<f64>,
}

impl DimensionImportance {
    /// `[trivial, dim 1, …, dim d]`.
    pub fn to_vec(&self) -> Vec<f64> {
        std::iter::once(self.trivial).chain(self.dims.iter().copied()).collect()
    }
}

/// `p(r|D) = Σ_m p(Π_{r,m}|D)` for every dimension, plus the trivial mass.
pub fn dimension_importance(
    view: &SubsetView<'_>,
    prior: &DirichletParams,
    cfg: &PriorConfig,
    depth: usize,
) -> Result<DimensionImportance, PartitionError> {
    let candidates = enumerate_partitions_classification(view, prior, cfg, depth)?;
    let max = candidates.iter().map(|c| c.logprob).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = candidates.iter().map(|c| (c.logprob - max).exp()).collect();
    let norm: f64 = weights.iter().sum();

    let mut out = DimensionImportance { trivial: 0.0, dims: vec![0.0; view.data().d()] };
    for (cand, w) in candidates.iter().zip(&weights) {
        match cand.partition {
            Partition::Trivial => out.trivial += w / norm,
            Partition::Split { dim, .. } => out.dims[dim] += w / norm,
        }
    }
    Ok(out)
}
