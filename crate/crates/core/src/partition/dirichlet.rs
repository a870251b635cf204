use serde::{Deserialize, Serialize};

use super::PartitionError;
use crate::data::DataSet;
use crate::special::ln_beta;

/// Pseudo-counts `(α¹,…,α^C)` of a Dirichlet distribution over class
/// probabilities. Used both as the conjugate prior of a region and as its
/// posterior once observed counts are added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DirichletParams(Vec<f64>);

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self, PartitionError> {
        if alpha.is_empty() || alpha.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(PartitionError::InvalidParams(alpha));
        }
        Ok(Self(alpha))
    }

    /// `C` copies of `alpha`, e.g. `symmetric(2, 10.0)` for Beta(10, 10).
    pub fn symmetric(n_classes: usize, alpha: f64) -> Result<Self, PartitionError> {
        Self::new(vec![alpha; n_classes])
    }

    pub fn alphas(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pseudo count `Σα`.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Dirichlet mean `α_c / Σα`.
    pub fn mean(&self) -> Vec<f64> {
        let total = self.total();
        self.0.iter().map(|a| a / total).collect()
    }

    /// `α_c + scale·counts_c`; `scale = 1` gives the conjugate posterior.
    pub fn add_counts(&self, counts: &[u64], scale: f64) -> Result<Self, PartitionError> {
        if counts.len() != self.len() {
            return Err(PartitionError::LengthMismatch { expected: self.len(), found: counts.len() });
        }
        Self::new(self.0.iter().zip(counts).map(|(a, &c)| a + scale * c as f64).collect())
    }
}

impl TryFrom<Vec<f64>> for DirichletParams {
    type Error = PartitionError;

    fn try_from(alpha: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(alpha)
    }
}

impl From<DirichletParams> for Vec<f64> {
    fn from(p: DirichletParams) -> Self {
        p.0
    }
}

/// `ln B(α + counts) − ln B(α)`: the marginal log-likelihood of a class-count
/// vector under a Dirichlet prior. All-zero counts give exactly 0.
pub fn dm_marginal_loglike(counts: &[u64], prior: &DirichletParams) -> Result<f64, PartitionError> {
    if counts.len() != prior.len() {
        return Err(PartitionError::LengthMismatch { expected: prior.len(), found: counts.len() });
    }
    if counts.iter().all(|&c| c == 0) {
        return Ok(0.0);
    }
    let posterior: Vec<f64> = prior.alphas().iter().zip(counts).map(|(a, &c)| a + c as f64).collect();
    Ok(ln_beta(&posterior) - ln_beta(prior.alphas()))
}

/// Outcome model of a region: marginal likelihood with the parameters
/// integrated out against the region's prior, and the resulting posterior.
pub trait LikelihoodModel {
    type Posterior;

    /// Log marginal likelihood of the outcomes of `rows`; 0 for no rows.
    fn log_marginal(&self, data: &DataSet, rows: &[u32]) -> f64;

    fn posterior(&self, data: &DataSet, rows: &[u32]) -> Self::Posterior;
}

/// Categorical outcomes with a Dirichlet prior.
#[derive(Debug, Clone)]
pub struct DirichletMultinomial {
    pub prior: DirichletParams,
}

impl DirichletMultinomial {
    pub fn new(prior: DirichletParams) -> Self {
        Self { prior }
    }

    fn counts(&self, data: &DataSet, rows: &[u32]) -> Vec<u64> {
        let mut counts = vec![0u64; self.prior.len()];
        for &r in rows {
            counts[data.outcome(r as usize)] += 1;
        }
        counts
    }
}

impl LikelihoodModel for DirichletMultinomial {
    type Posterior = DirichletParams;

    fn log_marginal(&self, data: &DataSet, rows: &[u32]) -> f64 {
        dm_marginal_loglike(&self.counts(data, rows), &self.prior).expect("prior length matches class count")
    }

    fn posterior(&self, data: &DataSet, rows: &[u32]) -> DirichletParams {
        self.prior.add_counts(&self.counts(data, rows), 1.0).expect("prior length matches class count")
    }
}
