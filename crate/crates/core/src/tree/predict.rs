use serde::Serialize;

use super::{BayesianTree, TreeError, TreeNode};
use crate::partition::DirichletParams;

/// Anything that maps a feature vector to class probabilities.
pub trait Classifier {
    fn n_features(&self) -> usize;

    fn n_classes(&self) -> usize;

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, TreeError>;

    /// Most probable class; exact ties go to the lowest class index.
    fn predict_class(&self, x: &[f64]) -> Result<usize, TreeError> {
        Ok(argmax_lowest(&self.predict_proba(x)?))
    }
}

pub(crate) fn argmax_lowest(p: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = c;
        }
    }
    best
}

/// One answered rule on the way from the root to a leaf.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathStep {
    pub dim: usize,
    pub threshold: f64,
    /// `x[dim] ≤ threshold`
    pub lower: bool,
}

impl BayesianTree {
    fn check_width(&self, x: &[f64]) -> Result<(), TreeError> {
        if x.len() != self.n_features {
            return Err(TreeError::DimensionMismatch { expected: self.n_features, found: x.len() });
        }
        Ok(())
    }

    fn leaf_index(&self, x: &[f64], mut path: Option<&mut Vec<PathStep>>) -> usize {
        let mut idx = 0;
        while let TreeNode::Sprout { dim, threshold, lower, upper, .. } = &self.nodes[idx] {
            let go_lower = x[*dim] <= *threshold;
            if let Some(path) = path.as_deref_mut() {
                path.push(PathStep { dim: *dim, threshold: *threshold, lower: go_lower });
            }
            idx = if go_lower { *lower } else { *upper };
        }
        idx
    }

    /// Index of the leaf that `x` falls into.
    pub fn route(&self, x: &[f64]) -> Result<usize, TreeError> {
        self.check_width(x)?;
        Ok(self.leaf_index(x, None))
    }

    /// Leaf posterior for `x`: `x[dim] ≤ threshold` goes to the lower child.
    pub fn predict_posterior(&self, x: &[f64]) -> Result<&DirichletParams, TreeError> {
        let idx = self.route(x)?;
        match &self.nodes[idx] {
            TreeNode::Leaf { posterior, .. } => Ok(posterior),
            TreeNode::Sprout { .. } => unreachable!("routing ends at a leaf"),
        }
    }

    /// Rules answered on the way to `x`'s leaf.
    pub fn decision_path(&self, x: &[f64]) -> Result<Vec<PathStep>, TreeError> {
        self.check_width(x)?;
        let mut path = Vec::new();
        self.leaf_index(x, Some(&mut path));
        Ok(path)
    }
}

impl Classifier for BayesianTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Posterior mean `α_c / Σα` of the leaf.
    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, TreeError> {
        Ok(self.predict_posterior(x)?.mean())
    }
}
