//! Bayesian decision trees built by choosing a partition at every node,
//! without a pruning pass: a node stops when its chosen partition is the
//! trivial one.

mod build;
mod ensemble;
mod export;
mod predict;

pub use build::{
    build_gmt, build_tree, build_tree_with_root, smoothed_child_prior, ChoosePartition, ModalClassification,
    ModalGeneral,
};
pub use ensemble::{build_ensemble_distinct_roots, TreeEnsemble};
pub use export::{
    export_graph, export_structured, export_text, export_tree, format_sig, import_model, ExportFormat,
    ModelBody, SavedModel,
};
pub use predict::{Classifier, PathStep};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::{DirichletParams, PartitionError, PriorConfig};

#[derive(Debug, Error)]
pub enum TreeError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid model file: {0}")]
    Import(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Hyper-parameters of a tree build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmtConfig {
    /// Dirichlet prior of the root region.
    pub prior: DirichletParams,
    pub prior_cfg: PriorConfig,
    /// Smoothing proportion: each child's prior gains `delta × (its class counts)`.
    pub delta: f64,
    /// Forces leaves at this depth when set.
    pub max_depth: Option<usize>,
}

impl GmtConfig {
    /// Symmetric prior with pseudo-count 10 per class, `g = 0.99`,
    /// depth-dependent partition prior, no smoothing.
    pub fn for_classes(n_classes: usize) -> Self {
        Self {
            prior: DirichletParams::symmetric(n_classes, 10.0).expect("positive pseudo-count"),
            prior_cfg: PriorConfig::default(),
            delta: 0.0,
            max_depth: None,
        }
    }

    pub fn validate(&self, n_classes: usize) -> Result<(), TreeError> {
        if self.prior.len() != n_classes {
            return Err(TreeError::Config(format!(
                "prior has {} pseudo-counts but the data has {n_classes} classes",
                self.prior.len()
            )));
        }
        self.prior_cfg.validate()?;
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(TreeError::Config(format!("delta must be ≥ 0, got {}", self.delta)));
        }
        Ok(())
    }
}

/// Arena node. Children always have larger indices than their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        /// Region prior plus observed class counts.
        posterior: DirichletParams,
        counts: Vec<u64>,
        support: usize,
        /// Log posterior weight of the trivial partition at this node.
        logprob: f64,
    },
    Sprout {
        dim: usize,
        threshold: f64,
        lower: usize,
        upper: usize,
        support: usize,
    },
}

impl TreeNode {
    pub fn support(&self) -> usize {
        match self {
            TreeNode::Leaf { support, .. } | TreeNode::Sprout { support, .. } => *support,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }
}

/// A built tree together with its unnormalised log probability `ln f`,
/// the sum of the leaves' trivial-partition log posteriors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesianTree {
    pub nodes: Vec<TreeNode>,
    pub log_prob: f64,
    pub config: GmtConfig,
    pub n_features: usize,
    pub n_classes: usize,
    pub feature_names: Vec<String>,
    pub class_labels: Vec<String>,
    pub schema_hash: String,
}

impl BayesianTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Length of the longest root-to-leaf path (0 for a single leaf).
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            if let TreeNode::Sprout { lower, upper, .. } = node {
                depth[*lower] = depth[i] + 1;
                depth[*upper] = depth[i] + 1;
                max = max.max(depth[i] + 1);
            }
        }
        max
    }

    /// Node indices with their depth, lower child before upper (pre-order).
    pub fn preorder(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(0usize, 0usize)];
        while let Some((idx, depth)) = stack.pop() {
            out.push((idx, depth));
            if let TreeNode::Sprout { lower, upper, .. } = &self.nodes[idx] {
                stack.push((*upper, depth + 1));
                stack.push((*lower, depth + 1));
            }
        }
        out
    }
}
