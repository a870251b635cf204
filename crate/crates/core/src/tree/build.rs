use super::{BayesianTree, GmtConfig, TreeError, TreeNode};
use crate::data::{DataSet, SubsetView};
use crate::partition::search::split_counts;
use crate::partition::{
    dm_marginal_loglike, find_modal_partition_classification, find_modal_partition_general,
    partition_log_prior, DirichletMultinomial, DirichletParams, Partition, PartitionChoice, PartitionError,
    PartitionKind, PriorConfig,
};

/// Partition selection at a node. The tree builder is agnostic to how the
/// choice is made; greedy-modal trees use [`ModalClassification`].
pub trait ChoosePartition {
    fn choose(
        &self,
        view: &SubsetView<'_>,
        prior: &DirichletParams,
        cfg: &PriorConfig,
        depth: usize,
    ) -> Result<PartitionChoice, PartitionError>;
}

/// Modal partition via the incremental classification scan, `O(d·n)` per node.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModalClassification;

impl ChoosePartition for ModalClassification {
    fn choose(
        &self,
        view: &SubsetView<'_>,
        prior: &DirichletParams,
        cfg: &PriorConfig,
        depth: usize,
    ) -> Result<PartitionChoice, PartitionError> {
        find_modal_partition_classification(view, prior, cfg, depth)
    }
}

/// Modal partition through the generic likelihood interface with a
/// Dirichlet-multinomial model; same result as [`ModalClassification`] at
/// `O(d·n²)` cost.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModalGeneral;

impl ChoosePartition for ModalGeneral {
    fn choose(
        &self,
        view: &SubsetView<'_>,
        prior: &DirichletParams,
        cfg: &PriorConfig,
        depth: usize,
    ) -> Result<PartitionChoice, PartitionError> {
        find_modal_partition_general(view, &DirichletMultinomial::new(prior.clone()), cfg, depth)
    }
}

/// `α_c + δ·counts_c`.
pub fn smoothed_child_prior(
    parent_prior: &DirichletParams,
    child_counts: &[u64],
    delta: f64,
) -> Result<DirichletParams, PartitionError> {
    parent_prior.add_counts(child_counts, delta)
}

/// Greedy-modal tree: the modal partition is chosen at every node.
pub fn build_gmt(data: &DataSet, cfg: &GmtConfig) -> Result<BayesianTree, TreeError> {
    build_tree(data, cfg, &ModalClassification)
}

pub fn build_tree(
    data: &DataSet,
    cfg: &GmtConfig,
    chooser: &dyn ChoosePartition,
) -> Result<BayesianTree, TreeError> {
    build_tree_with_root(data, cfg, chooser, None)
}

struct Task<'a> {
    view: SubsetView<'a>,
    node: usize,
    depth: usize,
    prior: DirichletParams,
}

fn trivial_choice(
    view: &SubsetView<'_>,
    prior: &DirichletParams,
    cfg: &PriorConfig,
    depth: usize,
) -> Result<PartitionChoice, PartitionError> {
    let loglike = dm_marginal_loglike(&view.class_counts(), prior)?;
    let total_splits = split_counts(view).iter().sum();
    let logprior = partition_log_prior(PartitionKind::Trivial, depth, view.data().d(), 0, total_splits, cfg);
    Ok(PartitionChoice { partition: Partition::Trivial, loglike, logprob: loglike + logprior, index: 0 })
}

/// Builds a tree whose root partition is `root` (when given) and whose other
/// nodes come from `chooser`. Uses an explicit worklist, so tree depth is not
/// bounded by the call stack.
pub fn build_tree_with_root(
    data: &DataSet,
    cfg: &GmtConfig,
    chooser: &dyn ChoosePartition,
    root: Option<Partition>,
) -> Result<BayesianTree, TreeError> {
    cfg.validate(data.n_classes())?;
    if let Some(Partition::Split { dim, .. }) = root {
        if dim >= data.d() {
            return Err(TreeError::DimensionMismatch { expected: data.d(), found: dim + 1 });
        }
    }
    let placeholder = TreeNode::Sprout { dim: 0, threshold: 0.0, lower: 0, upper: 0, support: 0 };
    let mut nodes = vec![placeholder.clone()];
    let mut log_prob = 0.0;
    let mut stack = vec![Task { view: data.full_view(), node: 0, depth: 0, prior: cfg.prior.clone() }];

    while let Some(Task { view, node, depth, prior }) = stack.pop() {
        let choice = match (node, root) {
            (0, Some(Partition::Trivial)) => trivial_choice(&view, &prior, &cfg.prior_cfg, depth)?,
            (0, Some(forced)) => {
                PartitionChoice { partition: forced, loglike: f64::NAN, logprob: f64::NAN, index: 0 }
            }
            _ if cfg.max_depth.is_some_and(|m| depth >= m) => {
                trivial_choice(&view, &prior, &cfg.prior_cfg, depth)?
            }
            _ => chooser.choose(&view, &prior, &cfg.prior_cfg, depth)?,
        };
        let (dim, threshold) = match choice.partition {
            Partition::Split { dim, threshold } => (dim, threshold),
            Partition::Trivial => {
                let counts = view.class_counts();
                log_prob += choice.logprob;
                nodes[node] = TreeNode::Leaf {
                    posterior: prior.add_counts(&counts, 1.0)?,
                    counts,
                    support: view.len(),
                    logprob: choice.logprob,
                };
                continue;
            }
        };
        let (lower_view, upper_view) = view.split(dim, threshold);
        if lower_view.is_empty() || upper_view.is_empty() {
            // Only reachable with a forced root that does not separate the data.
            return Err(TreeError::Config(format!("split x{} ≤ {threshold} leaves one side empty", dim + 1)));
        }
        let lower = nodes.len();
        let upper = lower + 1;
        nodes.push(placeholder.clone());
        nodes.push(placeholder.clone());
        nodes[node] = TreeNode::Sprout { dim, threshold, lower, upper, support: view.len() };
        let lower_prior = smoothed_child_prior(&prior, &lower_view.class_counts(), cfg.delta)?;
        let upper_prior = smoothed_child_prior(&prior, &upper_view.class_counts(), cfg.delta)?;
        // upper pushed first so the lower subtree is finished first
        stack.push(Task { view: upper_view, node: upper, depth: depth + 1, prior: upper_prior });
        stack.push(Task { view: lower_view, node: lower, depth: depth + 1, prior: lower_prior });
    }

    Ok(BayesianTree {
        nodes,
        log_prob,
        config: cfg.clone(),
        n_features: data.d(),
        n_classes: data.n_classes(),
        feature_names: data.layout().names.clone(),
        class_labels: data.class_labels().to_vec(),
        schema_hash: data.schema_hash(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::PriorConfig;
    use approx::assert_relative_eq;

    fn fig1() -> DataSet {
        DataSet::from_rows(&[vec![0.0], vec![0.5], vec![1.25], vec![1.5], vec![1.75]], &[0, 0, 0, 1, 1], 2)
            .unwrap()
    }

    fn beta11_cfg() -> GmtConfig {
        GmtConfig {
            prior: DirichletParams::new(vec![1.0, 1.0]).unwrap(),
            prior_cfg: PriorConfig::uniform(),
            delta: 0.0,
            max_depth: None,
        }
    }

    #[test]
    fn fig1_tree_has_two_pure_leaves() {
        let tree = build_gmt(&fig1(), &beta11_cfg()).unwrap();
        assert_eq!(tree.nodes.len(), 3);
        match tree.root() {
            TreeNode::Sprout { dim: 0, threshold, .. } => assert_eq!(*threshold, 1.375),
            other => panic!("unexpected root {other:?}"),
        }
        let leaves: Vec<Vec<f64>> = tree
            .nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Leaf { posterior, .. } => Some(posterior.alphas().to_vec()),
                _ => None,
            })
            .collect();
        assert_eq!(leaves, vec![vec![4.0, 1.0], vec![1.0, 3.0]]);
    }

    #[test]
    fn single_observation_is_one_leaf() {
        let data = DataSet::from_rows(&[vec![2.0, 7.0]], &[0], 2).unwrap();
        let cfg = GmtConfig::for_classes(2);
        let tree = build_gmt(&data, &cfg).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        // ln(10/20) + ln(1 − 0.99)
        assert_relative_eq!(tree.log_prob, 0.5f64.ln() + 0.01f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn smoothing_adds_scaled_counts() {
        let prior = DirichletParams::new(vec![10.0, 10.0]).unwrap();
        assert_eq!(smoothed_child_prior(&prior, &[3, 1], 0.0).unwrap(), prior);
        let s = smoothed_child_prior(&prior, &[3, 1], 0.1).unwrap();
        assert_relative_eq!(s.alphas()[0], 10.3, max_relative = 1e-15);
        assert_relative_eq!(s.alphas()[1], 10.1, max_relative = 1e-15);
        let one = DirichletParams::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(smoothed_child_prior(&one, &[0, 0], 0.7).unwrap(), one);
    }

    #[test]
    fn max_depth_caps_the_tree() {
        let mut cfg = beta11_cfg();
        cfg.max_depth = Some(0);
        let tree = build_gmt(&fig1(), &cfg).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.depth(), 0);
    }

    #[test]
    fn general_chooser_builds_same_tree() {
        let data = fig1();
        let a = build_tree(&data, &beta11_cfg(), &ModalClassification).unwrap();
        let b = build_tree(&data, &beta11_cfg(), &ModalGeneral).unwrap();
        assert_eq!(a.nodes.len(), b.nodes.len());
        assert_relative_eq!(a.log_prob, b.log_prob, epsilon = 1e-12);
    }

    #[test]
    fn config_is_validated() {
        let mut cfg = beta11_cfg();
        cfg.delta = -1.0;
        assert!(matches!(build_gmt(&fig1(), &cfg), Err(TreeError::Config(_))));
        let cfg = GmtConfig::for_classes(3);
        assert!(matches!(build_gmt(&fig1(), &cfg), Err(TreeError::Config(_))));
    }

    #[test]
    fn forced_root_that_separates_nothing_is_rejected() {
        let data = fig1();
        let root = Partition::Split { dim: 0, threshold: 10.0 };
        assert!(build_tree_with_root(&data, &beta11_cfg(), &ModalClassification, Some(root)).is_err());
    }
}
