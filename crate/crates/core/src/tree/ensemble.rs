use serde::{Deserialize, Serialize};

use super::build::{build_gmt, build_tree_with_root, ModalClassification};
use super::predict::Classifier;
use super::{BayesianTree, GmtConfig, TreeError};
use crate::data::DataSet;
use crate::partition::enumerate_partitions_classification;

/// Trees weighted by their normalised probabilities `f_i / Σ_j f_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub trees: Vec<BayesianTree>,
    pub weights: Vec<f64>,
    /// Tree count asked for; larger than `trees.len()` when the root had too
    /// few distinct candidates.
    pub requested: usize,
}

impl TreeEnsemble {
    pub fn from_trees(trees: Vec<BayesianTree>, requested: usize) -> Result<Self, TreeError> {
        let first =
            trees.first().ok_or_else(|| TreeError::Config("an ensemble needs at least one tree".into()))?;
        if trees.iter().any(|t| t.n_features != first.n_features || t.n_classes != first.n_classes) {
            return Err(TreeError::Config("ensemble members disagree on shape".into()));
        }
        let weights = normalized_weights(&trees.iter().map(|t| t.log_prob).collect::<Vec<_>>());
        Ok(Self { trees, weights, requested })
    }

    pub fn truncated(&self) -> bool {
        self.trees.len() < self.requested
    }
}

/// `exp(l_i − max) / Σ_j exp(l_j − max)`.
fn normalized_weights(log_probs: &[f64]) -> Vec<f64> {
    let max = log_probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = log_probs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

impl Classifier for TreeEnsemble {
    fn n_features(&self) -> usize {
        self.trees[0].n_features
    }

    fn n_classes(&self) -> usize {
        self.trees[0].n_classes
    }

    /// Weighted average of the members' posterior means.
    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, TreeError> {
        let mut out = vec![0.0; self.n_classes()];
        for (tree, w) in self.trees.iter().zip(&self.weights) {
            for (o, p) in out.iter_mut().zip(tree.predict_proba(x)?) {
                *o += w * p;
            }
        }
        Ok(out)
    }
}

/// The greedy-modal tree plus up to `k − 1` trees whose root is forced to the
/// next-best non-trivial root partitions (ranked by log posterior, canonical
/// scan order among equals), each grown greedy-modally below the root.
pub fn build_ensemble_distinct_roots(
    data: &DataSet,
    cfg: &GmtConfig,
    k: usize,
) -> Result<TreeEnsemble, TreeError> {
    if k == 0 {
        return Err(TreeError::Config("tree count must be at least 1".into()));
    }
    cfg.validate(data.n_classes())?;
    let gmt = build_gmt(data, cfg)?;
    let mut ranked = enumerate_partitions_classification(&data.full_view(), &cfg.prior, &cfg.prior_cfg, 0)?;
    // stable: equal scores keep canonical order
    ranked.sort_by(|a, b| b.logprob.total_cmp(&a.logprob));

    let mut trees = vec![gmt];
    for cand in ranked.iter().skip(1) {
        if trees.len() == k {
            break;
        }
        if cand.partition.is_trivial() {
            continue;
        }
        trees.push(build_tree_with_root(data, cfg, &ModalClassification, Some(cand.partition))?);
    }
    if trees.len() < k {
        log::warn!("requested {k} trees but only {} distinct roots are available", trees.len());
    }
    TreeEnsemble::from_trees(trees, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{DirichletParams, Partition, PriorConfig};
    use crate::tree::TreeNode;
    use approx::assert_relative_eq;

    fn fig1() -> DataSet {
        DataSet::from_rows(&[vec![0.0], vec![0.5], vec![1.25], vec![1.5], vec![1.75]], &[0, 0, 0, 1, 1], 2)
            .unwrap()
    }

    fn cfg() -> GmtConfig {
        GmtConfig {
            prior: DirichletParams::new(vec![1.0, 1.0]).unwrap(),
            prior_cfg: PriorConfig::uniform(),
            delta: 0.0,
            max_depth: None,
        }
    }

    fn root_threshold(tree: &BayesianTree) -> Option<f64> {
        match tree.root() {
            TreeNode::Sprout { threshold, .. } => Some(*threshold),
            TreeNode::Leaf { .. } => None,
        }
    }

    #[test]
    fn single_tree_has_unit_weight() {
        let data = fig1();
        let ens = build_ensemble_distinct_roots(&data, &cfg(), 1).unwrap();
        assert_eq!(ens.trees.len(), 1);
        assert_eq!(ens.weights, vec![1.0]);
        let gmt = build_gmt(&data, &cfg()).unwrap();
        for x in [0.1, 1.3, 1.4, 3.0] {
            assert_eq!(ens.predict_proba(&[x]).unwrap(), gmt.predict_proba(&[x]).unwrap());
        }
    }

    #[test]
    fn second_tree_uses_second_best_root() {
        let ens = build_ensemble_distinct_roots(&fig1(), &cfg(), 2).unwrap();
        let roots: Vec<_> = ens.trees.iter().map(root_threshold).collect();
        assert_eq!(roots, vec![Some(1.375), Some(0.875)]);
        assert_relative_eq!(ens.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(ens.weights[0] > ens.weights[1]);
    }

    #[test]
    fn too_many_trees_truncates() {
        let ens = build_ensemble_distinct_roots(&fig1(), &cfg(), 10).unwrap();
        // four non-trivial root candidates
        assert_eq!(ens.trees.len(), 4);
        assert!(ens.truncated());
        assert_relative_eq!(ens.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(ens.trees.iter().all(|t| !t.root().is_leaf()));
    }

    #[test]
    fn duplicate_trees_do_not_change_predictions() {
        let gmt = build_gmt(&fig1(), &cfg()).unwrap();
        let ens = TreeEnsemble::from_trees(vec![gmt.clone(), gmt.clone()], 2).unwrap();
        assert_eq!(ens.weights, vec![0.5, 0.5]);
        for x in [0.1, 1.3, 1.4, 3.0] {
            let a = ens.predict_proba(&[x]).unwrap();
            let b = gmt.predict_proba(&[x]).unwrap();
            for (p, q) in a.iter().zip(&b) {
                assert_relative_eq!(p, q, epsilon = 1e-15);
            }
        }
        let _ = Partition::Trivial;
    }

    #[test]
    fn zero_trees_is_an_error() {
        assert!(build_ensemble_distinct_roots(&fig1(), &cfg(), 0).is_err());
    }
}
